import numpy as np
import pytest

from tecsim import qsim
from tecsim.channels import ErrorSpec, erase_unchecked, inject
from tecsim.circuit import Circuit, GateOp, statevector
from tecsim.errors import UncorrectableError, ValidationError
from tecsim.tec import (
    BITFLIP_LAYOUT,
    ERASURE_LAYOUT,
    ErasureFlag,
    MessageParams,
    build_bitflip_tec_circuit,
    build_erasure_tec_circuit,
    build_phaseflip_tec_circuit,
    coherent_correct,
    decoded_distribution,
    decoded_fidelity,
    decoded_qubit_density,
    extract_erasure_flag,
    output_density,
    qnd_detect,
    sample_decoded,
    syndrome,
    syndrome_extract,
)
from tecsim.tec.analysis import cbit_marginal, target_state
from tecsim.tec.codes import encode_repetition3, logical_state

from conftest import P0, sigma3

BF_CASES = [None, 0, 1, 2]


def spec(kind, q):
    return ErrorSpec() if q is None else ErrorSpec(kind, q)


# -- fragments -------------------------------------------------------------


@pytest.mark.parametrize("err,expected", [(None, (0, 0)), (0, (1, 1)), (1, (1, 0)), (2, (0, 1))])
def test_syndrome_extract_table(err, expected):
    c = Circuit(11)
    c.compose(encode_repetition3(), [3, 4, 5])
    if err is not None:
        c.x(3 + err)
    c.compose(syndrome_extract())
    probs = qsim.marginal_probabilities(statevector(c), [9, 10])
    idx = expected[0] | (expected[1] << 1)
    assert probs[idx] == pytest.approx(1.0)


@pytest.mark.parametrize("err", [None, 0, 1, 2])
def test_coherent_correct_undoes_single_x(err, rng):
    amps = rng.normal(size=2) + 1j * rng.normal(size=2)
    amps /= np.linalg.norm(amps)
    init = np.zeros(1 << 11, complex)
    init[0], init[1] = amps
    c = Circuit(11)
    c.compose(encode_repetition3(), [0, 1, 2])
    c.cx(0, 3).cx(1, 4).cx(2, 5)  # copy onto bell_first
    if err is not None:
        c.x(3 + err)
    c.compose(syndrome_extract()).compose(coherent_correct())
    out = statevector(c, init)
    rho = qsim.reduced_density(out, [0, 1, 2, 3, 4, 5])
    ref = np.zeros(64, complex)
    ref[0], ref[63] = amps
    assert qsim.fidelity_pure(rho, ref) == pytest.approx(1.0, abs=1e-10)


def test_qnd_detect_fragment():
    frag = qnd_detect(ERASURE_LAYOUT)
    assert [op.qubits for op in frag.ops] == [(0, 12), (1, 12), (0, 13), (1, 13), (2, 14), (3, 14), (2, 15), (3, 15)]


# -- bit-flip / phase-flip -------------------------------------------------


@pytest.mark.parametrize("q", BF_CASES)
def test_bitflip_pipeline(q):
    c = build_bitflip_tec_circuit(spec("BitFlip", q))
    assert c.num_qubits == 11
    assert decoded_fidelity(c) == pytest.approx(1.0, abs=1e-10)
    assert decoded_distribution(c)[0] == pytest.approx(P0, abs=1e-10)


@pytest.mark.parametrize("q,expected", [(None, (0, 0)), (0, (1, 1)), (1, (1, 0)), (2, (0, 1))])
def test_bitflip_syndrome(q, expected):
    assert syndrome(build_bitflip_tec_circuit(spec("BitFlip", q))).as_tuple() == expected


def test_bitflip_double_error_fails():
    c = inject(build_bitflip_tec_circuit(ErrorSpec("BitFlip", 0)), ErrorSpec("BitFlip", 1))
    assert decoded_fidelity(c) < 0.9


def test_bitflip_alpha_one():
    c = build_bitflip_tec_circuit(params=MessageParams(1.0, 0.0))
    res = cbit_marginal(c, [0, 1, 2])
    assert res == pytest.approx({"000": 1.0})


def test_bitflip_block_order():
    c = build_bitflip_tec_circuit()
    assert c.labels == ["eps", "decode"]
    assert c.ops[0].kind == "Ry" and c.count("Toffoli") == 3 and c.count("Measure") == 3


def test_pipeline_rejects_wrong_kind():
    with pytest.raises(ValidationError):
        build_bitflip_tec_circuit(ErrorSpec("PhaseFlip", 0))
    with pytest.raises(ValidationError):
        build_phaseflip_tec_circuit(ErrorSpec("BitFlip", 0))
    with pytest.raises(ValidationError):
        build_erasure_tec_circuit(ErrorSpec("BitFlip", 0))


@pytest.mark.parametrize("q", BF_CASES)
def test_phaseflip_pipeline(q):
    c = build_phaseflip_tec_circuit(spec("PhaseFlip", q))
    assert decoded_fidelity(c) == pytest.approx(1.0, abs=1e-10)
    i = c.marker_index("eps")
    assert [op.kind for op in c.ops[i - 3:i]] == ["H"] * 3


def test_phaseflip_does_not_fix_x():
    c = inject(build_phaseflip_tec_circuit(), ErrorSpec("BitFlip", 0))
    assert decoded_fidelity(c) < 1 - 1e-3


def test_sampled_statistics():
    c = build_bitflip_tec_circuit(ErrorSpec("BitFlip", 2))
    counts = sample_decoded(c, 8192, seed=1)
    assert abs(counts[0] / 8192 - P0) < sigma3(P0, 8192)


# -- erasure ---------------------------------------------------------------


@pytest.mark.parametrize("q", range(4))
@pytest.mark.parametrize("mode", ["GateRemoval", "ResetAndFlag"])
def test_erasure_pipeline(q, mode):
    c = build_erasure_tec_circuit(ErrorSpec("Erasure", q, erasure_mode=mode))
    assert c.num_qubits == 16
    assert decoded_fidelity(c) == pytest.approx(1.0, abs=1e-10)
    assert decoded_distribution(c)[0] == pytest.approx(P0, abs=1e-10)


def test_erasure_modes_agree():
    for q in range(4):
        a = decoded_distribution(build_erasure_tec_circuit(ErrorSpec("Erasure", q, erasure_mode="GateRemoval")))
        b = decoded_distribution(build_erasure_tec_circuit(ErrorSpec("Erasure", q, erasure_mode="ResetAndFlag")))
        assert a == pytest.approx(b, abs=1e-10)


def test_erasure_no_error_and_device_variant():
    assert decoded_fidelity(build_erasure_tec_circuit()) == pytest.approx(1.0, abs=1e-10)
    dev = build_erasure_tec_circuit(ErrorSpec("Erasure", 3), device_faithful=True)
    assert dev.num_qubits == 14
    assert decoded_fidelity(dev) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("pair", [(0, 1), (0, 2), (1, 3)])
def test_double_erasure_fails(pair):
    base = build_erasure_tec_circuit(ErrorSpec("Erasure", pair[0]))
    base.metadata.pop("erased")
    two = erase_unchecked(base, [pair[1]])
    assert decoded_fidelity(two) < 1 - 1e-3


def test_qnd_signatures():
    clean = build_erasure_tec_circuit()
    assert cbit_marginal(clean, [4, 5, 6, 7]) == pytest.approx({"0000": 1.0})
    for q in range(4):
        c = build_erasure_tec_circuit(ErrorSpec("Erasure", q))
        marg = cbit_marginal(c, [4, 5, 6, 7])
        fired = "1100" if q < 2 else "0011"
        assert marg == pytest.approx({"0000": 0.5, fired: 0.5})
        assert extract_erasure_flag([int(b) for b in fired], [q]) == ErasureFlag({q})
        assert extract_erasure_flag([0, 0, 0, 0], [q]) == ErasureFlag({q}, ambiguous=True)


def test_extract_flag_rules():
    assert extract_erasure_flag([0, 0, 0, 0]) == ErasureFlag()
    with pytest.raises(UncorrectableError):
        extract_erasure_flag([1, 1, 0, 0])
    with pytest.raises(UncorrectableError):
        extract_erasure_flag([1, 1, 0, 0], [2])
    with pytest.raises(UncorrectableError):
        extract_erasure_flag([0, 0, 0, 0], [0, 2])
    with pytest.raises(ValidationError):
        extract_erasure_flag([0, 0])


def test_erasure_uses_avoiding_representatives():
    c = build_erasure_tec_circuit(ErrorSpec("Erasure", 1))
    assert c.metadata["representatives"] == ["ZIZI", "IIXX"]


# -- measured conditionals (Pauli frame) -----------------------------------


def all_cases():
    for q in BF_CASES:
        yield build_bitflip_tec_circuit, spec("BitFlip", q)
        yield build_phaseflip_tec_circuit, spec("PhaseFlip", q)
    yield build_erasure_tec_circuit, ErrorSpec()
    for q in range(4):
        for mode in ("GateRemoval", "ResetAndFlag"):
            yield build_erasure_tec_circuit, ErrorSpec("Erasure", q, erasure_mode=mode)


@pytest.mark.parametrize("builder,s", list(all_cases()))
def test_frame_equivalence(builder, s):
    coh = builder(s)
    meas = builder(s, conditionals="measured")
    assert meas.metadata["frame_rules"]
    a, b = decoded_distribution(coh), decoded_distribution(meas)
    assert a == pytest.approx(b, abs=1e-10)
    assert np.allclose(output_density(coh), output_density(meas), atol=1e-10)


def test_decoded_qubit_density():
    for c in (build_bitflip_tec_circuit(ErrorSpec("BitFlip", 1)), build_erasure_tec_circuit(ErrorSpec("Erasure", 2))):
        rho = decoded_qubit_density(c)
        msg = np.array([complex(*a) for a in c.metadata["message"]])
        assert qsim.fidelity_pure(rho, msg) == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(target_state(c), logical_state(c.metadata["code"], msg))
