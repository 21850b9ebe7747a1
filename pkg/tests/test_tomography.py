import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tecsim import qsim
from tecsim.circuit import Circuit, statevector
from tecsim.errors import CapacityError, ParseError, ValidationError
from tecsim.tomography import (
    BasisCounts,
    analytic_counts,
    frobenius_error,
    load_report,
    project_physical,
    reconstruct,
    report,
    rotation_fragment,
    sample_counts,
    schedule_full,
    setting_probabilities,
)

from conftest import ALPHA, BETA, random_state

MSG = np.array([ALPHA, BETA], complex)


def test_schedule():
    assert schedule_full(1).settings == ("X", "Y", "Z")
    s2 = schedule_full(2).settings
    assert len(s2) == 9 and s2[0] == "XX" and s2[-1] == "ZZ"
    assert len(schedule_full(3).settings) == 27
    with pytest.raises(CapacityError):
        schedule_full(4)


def test_rotation_fragment():
    assert len(rotation_fragment("Z")) == 0
    plus = Circuit(1).h(0)
    c = plus.copy().compose(rotation_fragment("X"))
    assert abs(statevector(c)[0]) ** 2 == pytest.approx(1)
    plus_i = Circuit(1).h(0).s(0)
    c = plus_i.copy().compose(rotation_fragment("Y"))
    assert abs(statevector(c)[0]) ** 2 == pytest.approx(1)


def test_analytic_zero_state():
    rep = reconstruct(analytic_counts(np.diag([1.0, 0.0]).astype(complex)))
    assert np.allclose(rep.rho, [[1, 0], [0, 0]], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_analytic_reconstruction_exact(n, seed):
    psi = random_state(n, np.random.default_rng(seed))
    rho = qsim.pure_density(psi)
    rep = reconstruct(analytic_counts(rho), psi)
    assert np.abs(rep.rho - rho).max() < 1e-10
    assert rep.fidelity_to_target == pytest.approx(1.0, abs=1e-10)


def test_sampled_decoded_qubit_fidelity():
    rho = qsim.pure_density(MSG)
    fids = [reconstruct(sample_counts(rho, 8192, seed), MSG).fidelity_to_target for seed in range(20)]
    assert min(fids) >= 0.98 and np.median(fids) >= 0.995


def test_shot_scaling():
    rng = np.random.default_rng(3)
    lo, hi = [], []
    for seed in range(20):
        psi = random_state(2, rng)
        rho = qsim.pure_density(psi)
        lo.append(frobenius_error(reconstruct(sample_counts(rho, 1024, seed)).rho, rho))
        hi.append(frobenius_error(reconstruct(sample_counts(rho, 65536, seed)).rho, rho))
    assert np.median(hi) < np.median(lo)


def test_projection():
    rho = qsim.pure_density(random_state(2, np.random.default_rng(1)))
    out, moved = project_physical(rho)
    assert np.abs(out - rho).max() < 1e-12 and not moved
    bad = np.diag([1.2, -0.2]).astype(complex)
    out, moved = project_physical(bad)
    assert moved and np.allclose(out, np.diag([1, 0]))
    qsim.check_density(out)


def test_reconstruct_errors():
    counts = analytic_counts(qsim.pure_density(MSG))
    with pytest.raises(ValidationError, match="missing"):
        reconstruct(counts[:2])
    uneven = counts[:2] + [BasisCounts("Z", {"0": 10, "1": 5})]
    scaled = [BasisCounts(c.setting, {k: v * 15 for k, v in c.histogram.items()}) for c in counts[:2]]
    reconstruct(scaled + [uneven[2]])
    with pytest.raises(ValidationError, match="shot"):
        reconstruct(counts[:2] + [BasisCounts("Z", {"0": 10, "1": 5})])


def test_readout_error_probabilities():
    p = setting_probabilities(np.diag([1.0, 0.0]).astype(complex), "Z", readout_error=0.1)
    assert np.allclose(p, [0.9, 0.1])


def test_report_roundtrip():
    rep = reconstruct(analytic_counts(np.diag([1.0, 0.0]).astype(complex)))
    doc = json.loads(report(rep))
    assert doc["real"] == [[1.0, 0.0], [0.0, 0.0]] and doc["imag"] == [[0.0, 0.0], [0.0, 0.0]]
    assert doc["version"] == 1 and doc["n"] == 1 and 0 <= doc["fidelity"] <= 1
    back = load_report(report(rep))
    assert np.array_equal(back.rho, rep.rho)
    with pytest.raises(ParseError):
        load_report("{}")


def test_sample_counts_deterministic():
    rho = qsim.pure_density(MSG)
    a = sample_counts(rho, 1000, 4)
    b = sample_counts(rho, 1000, 4)
    assert [c.histogram for c in a] == [c.histogram for c in b]
    assert all(c.total == 1000 for c in a)
