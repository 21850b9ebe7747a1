"""Pauli-basis state tomography by linear inversion.

Every qubit is measured in X, Y or Z; a setting such as ``"XZ"`` measures
qubit 0 in X and qubit 1 in Z.  Histogram keys are bitstrings whose
character ``j`` is qubit ``j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np

from . import qsim
from .circuit import Circuit, unitary_of
from .errors import CapacityError, ParseError, ValidationError
from .qsim import DTYPE, RandomSource

MAX_TOMOGRAPHY_QUBITS = 3
REPORT_VERSION = 1
# eigenvalue shifts below this do not count as a physicality correction
PROJECTION_TOL = 1e-9


@dataclass(frozen=True)
class TomographySchedule:
    num_qubits: int
    settings: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))
        if len(set(self.settings)) != len(self.settings):
            raise ValidationError("tomography settings must be distinct")
        for s in self.settings:
            _check_setting(s, self.num_qubits)


def _check_setting(setting: str, n: int | None = None) -> None:
    if not setting or set(setting) - set("XYZ"):
        raise ValidationError(f"setting must be a non-empty string over X, Y, Z, got {setting!r}")
    if n is not None and len(setting) != n:
        raise ValidationError(f"setting {setting!r} does not have {n} characters")


def schedule_full(num_qubits: int) -> TomographySchedule:
    """All 3^n settings in lexicographic order (X < Y < Z)."""
    if num_qubits < 1:
        raise ValidationError(f"num_qubits must be >= 1, got {num_qubits}")
    if num_qubits > MAX_TOMOGRAPHY_QUBITS:
        raise CapacityError(f"full tomography is limited to {MAX_TOMOGRAPHY_QUBITS} qubits, got {num_qubits}")
    return TomographySchedule(num_qubits, tuple("".join(p) for p in product("XYZ", repeat=num_qubits)))


def rotation_fragment(setting: str) -> Circuit:
    """Basis change mapping the requested Pauli eigenbasis onto Z."""
    _check_setting(setting)
    frag = Circuit(len(setting))
    for q, b in enumerate(setting):
        if b == "X":
            frag.h(q)
        elif b == "Y":
            frag.sdg(q).h(q)
    return frag


@dataclass
class BasisCounts:
    """Histogram for one setting.  Values may be probabilities (analytic limit)."""

    setting: str
    histogram: dict[str, float]

    def __post_init__(self):
        _check_setting(self.setting)
        for k, v in self.histogram.items():
            if len(k) != len(self.setting) or set(k) - {"0", "1"}:
                raise ValidationError(f"bad outcome {k!r} for setting {self.setting!r}")
            if v < 0:
                raise ValidationError(f"negative count {v} for outcome {k!r}")

    @property
    def total(self) -> float:
        return sum(self.histogram.values())


@dataclass
class ReconstructionReport:
    rho: np.ndarray
    fidelity_to_target: float
    shots_per_setting: int
    physicality_corrected: bool
    raw: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_qubits(self) -> int:
        return qsim.num_qubits_of(self.rho)


def setting_probabilities(rho: np.ndarray, setting: str, readout_error: float = 0.0) -> np.ndarray:
    """Outcome distribution of ``setting`` on ``rho``; index bit ``j`` is qubit ``j``.

    ``readout_error`` flips each reported bit independently.
    """
    n = qsim.num_qubits_of(rho)
    _check_setting(setting, n)
    u = unitary_of(rotation_fragment(setting))
    probs = np.clip(np.real(np.diag(u @ rho @ u.conj().T)), 0, None)
    if readout_error > 0:
        t = probs.reshape((2,) * n)
        conf = np.array([[1 - readout_error, readout_error], [readout_error, 1 - readout_error]])
        for axis in range(n):
            t = np.moveaxis(np.tensordot(conf, t, axes=([1], [axis])), 0, axis)
        probs = t.reshape(-1)
    return probs / probs.sum()


def analytic_counts(rho: np.ndarray, schedule: TomographySchedule | None = None) -> list[BasisCounts]:
    """Infinite-shot histograms (probabilities) for every setting."""
    schedule = schedule or schedule_full(qsim.num_qubits_of(rho))
    n = schedule.num_qubits
    out = []
    for s in schedule.settings:
        p = setting_probabilities(rho, s)
        out.append(BasisCounts(s, {qsim.bitstring(i, n): float(v) for i, v in enumerate(p) if v > 0}))
    return out


def sample_counts(rho: np.ndarray, shots: int, seed: int = 0, schedule: TomographySchedule | None = None,
                  readout_error: float = 0.0) -> list[BasisCounts]:
    """``shots`` samples per setting; setting ``i`` uses substream ``(seed, i)``."""
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    schedule = schedule or schedule_full(qsim.num_qubits_of(rho))
    n = schedule.num_qubits
    root = RandomSource(seed)
    out = []
    for i, s in enumerate(schedule.settings):
        p = setting_probabilities(rho, s, readout_error)
        draws = root.spawn(i).generator.multinomial(shots, p)
        out.append(BasisCounts(s, {qsim.bitstring(j, n): int(c) for j, c in enumerate(draws) if c}))
    return out


def pauli_matrix(pauli: str) -> np.ndarray:
    # qubit 0 is the least significant index bit, hence the reversal
    return reduce(np.kron, [qsim.PAULI[c] for c in reversed(pauli)])


def _expectation(counts: BasisCounts, pauli: str) -> float:
    total = counts.total
    acc = 0.0
    for bits, v in counts.histogram.items():
        parity = sum(int(bits[q]) for q, c in enumerate(pauli) if c != "I") & 1
        acc += -v if parity else v
    return acc / total


def linear_inversion(counts: Sequence[BasisCounts]) -> np.ndarray:
    """rho = 2^-n sum_P <P> P, each <P> averaged over the settings that measure it."""
    n = len(counts[0].setting)
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=DTYPE)
    for pauli in map("".join, product("IXYZ", repeat=n)):
        compatible = [c for c in counts
                      if all(p == "I" or p == s for p, s in zip(pauli, c.setting))]
        if not compatible:
            raise ValidationError(f"no setting measures {pauli}")
        ev = float(np.mean([_expectation(c, pauli) for c in compatible]))
        rho += ev * pauli_matrix(pauli)
    return rho / dim


def _simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    k = np.nonzero(u - css / np.arange(1, len(v) + 1) > 0)[0][-1]
    return np.maximum(v - css[k] / (k + 1), 0)


def project_physical(rho: np.ndarray) -> tuple[np.ndarray, bool]:
    """Nearest density matrix in Frobenius norm, and whether it moved any eigenvalue."""
    h = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(h)
    w2 = _simplex(w)
    moved = bool(np.max(np.abs(w2 - w)) > PROJECTION_TOL)
    out = (v * w2) @ v.conj().T
    return (out + out.conj().T) / 2, moved


def reconstruct(counts: Sequence[BasisCounts], target: np.ndarray | None = None) -> ReconstructionReport:
    """Full reconstruction from all 3^n settings with equal shots.

    ``target`` is the ideal pure state used for the fidelity field.  Without
    one, the fidelity is to the leading eigenvector of the estimate (its
    largest eigenvalue).
    """
    if not counts:
        raise ValidationError("no counts given")
    n = len(counts[0].setting)
    expected = set(schedule_full(n).settings)
    got = [c.setting for c in counts]
    if len(set(got)) != len(got):
        raise ValidationError("duplicate settings in counts")
    missing = expected - set(got)
    if missing:
        raise ValidationError(f"missing settings: {sorted(missing)}")
    if set(got) - expected:
        raise ValidationError(f"unexpected settings: {sorted(set(got) - expected)}")
    totals = {c.total for c in counts}
    if max(totals) - min(totals) > 1e-9 * max(totals):
        raise ValidationError(f"settings have different shot counts: {sorted(totals)}")
    raw = linear_inversion(counts)
    rho, moved = project_physical(raw)
    if target is None:
        fid = float(min(1.0, max(0.0, np.linalg.eigvalsh(rho)[-1])))
    else:
        fid = qsim.fidelity_pure(rho, np.asarray(target, dtype=DTYPE))
    total = counts[0].total
    shots = int(round(total)) if abs(total - round(total)) < 1e-9 and total > 1 + 1e-9 else 0
    return ReconstructionReport(rho, fid, shots, moved, raw)


def frobenius_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b))


# ---------------------------------------------------------------------------
# serialization


def report_to_json(report: ReconstructionReport) -> dict:
    fid = report.fidelity_to_target
    return {
        "version": REPORT_VERSION,
        "n": report.num_qubits,
        "real": np.real(report.rho).tolist(),
        "imag": np.imag(report.rho).tolist(),
        "fidelity": min(1.0, max(0.0, float(fid))),
        "shots_per_setting": report.shots_per_setting,
        "physicality_corrected": report.physicality_corrected,
    }


def report(rep: ReconstructionReport) -> str:
    return json.dumps(report_to_json(rep), indent=2)


def load_report(text: str) -> ReconstructionReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    need = {"version", "n", "real", "imag", "fidelity", "shots_per_setting", "physicality_corrected"}
    if not isinstance(doc, dict) or set(doc) != need:
        raise ParseError(f"report must have exactly the fields {sorted(need)}")
    if doc["version"] != REPORT_VERSION:
        raise ParseError(f"unsupported report version {doc['version']!r}")
    rho = np.array(doc["real"], dtype=float) + 1j * np.array(doc["imag"], dtype=float)
    if rho.shape != (1 << doc["n"],) * 2:
        raise ParseError(f"matrix shape {rho.shape} does not match n={doc['n']}")
    return ReconstructionReport(rho, doc["fidelity"], int(doc["shots_per_setting"]),
                                bool(doc["physicality_corrected"]))
