import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tecsim import qsim
from tecsim.circuit import FIXED_GATES, ry_matrix
from tecsim.errors import CapacityError, QubitIndexError, ValidationError
from tecsim.qsim import RandomSource

from conftest import ALPHA, BETA, P0, random_state, sigma3

H = FIXED_GATES["H"]
CNOT = FIXED_GATES["CNOT"]


def test_zero_state():
    assert np.array_equal(qsim.zero_state(1), [1, 0])
    z3 = qsim.zero_state(3)
    assert z3[0] == 1 and np.count_nonzero(z3) == 1 and len(z3) == 8
    assert np.linalg.norm(qsim.zero_state(16)) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [0, 25])
def test_zero_state_capacity(n):
    with pytest.raises(CapacityError):
        qsim.zero_state(n)


def test_basis_state_convention():
    # qubit 0 is the leftmost symbol and the least significant index bit
    assert np.argmax(qsim.basis_state("100")) == 1
    assert np.argmax(qsim.basis_state("001")) == 4
    assert qsim.format_ket(qsim.basis_state("100")).endswith("|100>")


def test_hadamard():
    out = qsim.apply_unitary(qsim.zero_state(1), H, [0])
    assert np.allclose(out, [1 / math.sqrt(2)] * 2)


def test_cnot_makes_bell_pair():
    psi = (qsim.basis_state("00") + qsim.basis_state("10")) / math.sqrt(2)
    out = qsim.apply_unitary(psi, CNOT, [0, 1])
    assert np.allclose(out, (qsim.basis_state("00") + qsim.basis_state("11")) / math.sqrt(2))


def test_x_on_second_qubit_oracle():
    psi = ALPHA * qsim.basis_state("000") + BETA * qsim.basis_state("111")
    out = qsim.apply_unitary(psi, qsim.PAULI["X"], [1])
    # oracle: explicit kron with qubit 0 as the least significant factor
    full = np.kron(np.eye(2), np.kron(qsim.PAULI["X"], np.eye(2)))
    assert np.allclose(out, full @ psi, atol=1e-12)
    assert np.allclose(out, ALPHA * qsim.basis_state("010") + BETA * qsim.basis_state("101"))


def test_apply_unitary_errors():
    psi = qsim.zero_state(2)
    with pytest.raises(QubitIndexError):
        qsim.apply_unitary(psi, CNOT, [0, 0])
    with pytest.raises(QubitIndexError):
        qsim.apply_unitary(psi, H, [2])
    with pytest.raises(ValidationError):
        qsim.apply_unitary(psi, np.array([[1, 1], [0, 1]], complex), [0])
    with pytest.raises(ValidationError):
        qsim.apply_unitary(psi, H, [0, 1])


def test_apply_matches_dense_kron(rng):
    # random 3-qubit gate on random targets against a dense permutation oracle
    n = 5
    psi = random_state(n, rng)
    q, _ = np.linalg.qr(rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8)))
    targets = [3, 0, 4]
    out = qsim.apply_unitary(psi, q, targets)
    expected = np.zeros_like(psi)
    for i in range(1 << n):
        row = sum(((i >> t) & 1) << (2 - k) for k, t in enumerate(targets))
        for col in range(8):
            j = i
            for k, t in enumerate(targets):
                j = (j & ~(1 << t)) | (((col >> (2 - k)) & 1) << t)
            expected[i] += q[row, col] * psi[j]
    assert np.allclose(out, expected, atol=1e-12)


def test_builtin_gates_unitary():
    for name, m in FIXED_GATES.items():
        assert np.abs(m.conj().T @ m - np.eye(len(m))).max() < 1e-12, name
    assert np.abs(ry_matrix(0.3).conj().T @ ry_matrix(0.3) - np.eye(2)).max() < 1e-12


def test_measure_deterministic():
    bit, post = qsim.measure_z(qsim.basis_state("1"), 0, RandomSource(0))
    assert bit == 1 and np.allclose(post, qsim.basis_state("1"))


def test_measure_probability():
    psi = np.array([ALPHA, BETA], complex)
    assert 1 - qsim.probability_one(psi, 0) == pytest.approx(0.8535534, abs=1e-7)
    shots = 4000
    zeros = sum(qsim.measure_z(psi, 0, RandomSource(7).spawn(i))[0] == 0 for i in range(shots))
    assert abs(zeros / shots - P0) < sigma3(P0, shots)


def test_measure_never_picks_zero_branch():
    psi = qsim.basis_state("0")
    for i in range(200):
        assert qsim.measure_z(psi, 0, RandomSource(i))[0] == 0


def test_bell_measurements_correlated():
    bell = (qsim.basis_state("00") + qsim.basis_state("11")) / math.sqrt(2)
    for i in range(50):
        r = RandomSource(i)
        a, post = qsim.measure_z(bell, 0, r)
        b, _ = qsim.measure_z(post, 1, r)
        assert a == b


def test_sample_counts():
    assert qsim.sample_counts(qsim.zero_state(1), [0], 8192, RandomSource(0)) == {"0": 8192}
    plus = qsim.apply_unitary(qsim.zero_state(1), H, [0])
    c = qsim.sample_counts(plus, [0], 8192, RandomSource(3))
    assert abs(c["0"] / 8192 - 0.5) < sigma3(0.5, 8192)
    one = qsim.sample_counts(plus, [0], 1, RandomSource(3))
    assert sum(one.values()) == 1 and len(one) == 1


def test_sample_counts_deterministic():
    psi = random_state(4, np.random.default_rng(0))
    a = qsim.sample_counts(psi, [0, 2, 3], 1000, RandomSource(11))
    b = qsim.sample_counts(psi, [0, 2, 3], 1000, RandomSource(11))
    assert a == b


def test_density_and_partial_trace():
    assert np.allclose(qsim.pure_density(qsim.basis_state("0")), [[1, 0], [0, 0]])
    bell = (qsim.basis_state("00") + qsim.basis_state("11")) / math.sqrt(2)
    assert np.allclose(qsim.partial_trace(qsim.pure_density(bell), [0]), np.eye(2) / 2)
    ghz = ALPHA * qsim.basis_state("000") + BETA * qsim.basis_state("111")
    red = qsim.partial_trace(qsim.pure_density(ghz), [0])
    assert np.allclose(red, np.diag([0.8535534, 0.1464466]), atol=1e-7)
    with pytest.raises(ValidationError):
        qsim.partial_trace(qsim.pure_density(bell), [])


def test_reduced_density_matches_partial_trace(rng):
    psi = random_state(5, rng)
    for keep in ([0], [3, 1], [4, 0, 2]):
        assert np.allclose(qsim.reduced_density(psi, keep), qsim.partial_trace(qsim.pure_density(psi), keep))


def test_pure_density_single_unit_eigenvalue(rng):
    w = np.linalg.eigvalsh(qsim.pure_density(random_state(3, rng)))
    assert abs(w[-1] - 1) < 1e-8 and np.all(np.abs(w[:-1]) < 1e-8)


def test_fidelity_pure():
    psi = np.array([ALPHA, BETA], complex)
    assert qsim.fidelity_pure(qsim.pure_density(psi), psi) == pytest.approx(1.0)
    assert qsim.fidelity_pure(np.eye(2) / 2, psi) == pytest.approx(0.5)
    assert qsim.fidelity_pure(np.diag([0.9, 0.1]), qsim.basis_state("0")) == pytest.approx(0.9)
    with pytest.raises(ValidationError):
        qsim.fidelity_pure(np.eye(4) / 4, psi)


def test_pauli_expectation():
    bell = (qsim.basis_state("00") + qsim.basis_state("11")) / math.sqrt(2)
    assert qsim.pauli_expectation(qsim.basis_state("0"), "Z") == pytest.approx(1)
    assert qsim.pauli_expectation(bell, "ZZ") == pytest.approx(1)
    assert qsim.pauli_expectation(bell, "XX") == pytest.approx(1)
    with pytest.raises(ValidationError):
        qsim.pauli_expectation(bell, "ZQ")


def test_random_source_streams():
    a = RandomSource(5).spawn(3)
    b = RandomSource(5).spawn(3)
    assert [a.random() for _ in range(5)] == [b.random() for _ in range(5)]
    assert RandomSource(5).spawn(4).random() != RandomSource(5).spawn(3).random()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_measurement_completeness(n, seed):
    psi = random_state(n, np.random.default_rng(seed))
    for q in range(n):
        p1 = qsim.probability_one(psi, q)
        p0, _ = qsim.project(psi, q, 0)
        assert abs(p0 + p1 - 1) < 1e-10
