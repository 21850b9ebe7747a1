"""Dense state-vector simulation.

A state on ``n`` qubits is a complex128 numpy array of length ``2**n``.
Amplitude index ``i`` has qubit ``q`` in bit ``(i >> q) & 1``, so qubit 0 is
the least significant bit.  When a basis state is *written* as a ket or a
bitstring, qubit 0 is the leftmost symbol: ``|100>`` on three qubits is the
amplitude at index 1.  Every function in the package follows this rule.

Density matrices use the same index convention on both axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import CapacityError, QubitIndexError, ValidationError

MAX_QUBITS = 24
ATOL = 1e-10
# Branches lighter than this are treated as impossible.
ZERO_BRANCH = 1e-12

DTYPE = np.complex128

_S2 = 1 / np.sqrt(2)
PAULI = {
    "I": np.eye(2, dtype=DTYPE),
    "X": np.array([[0, 1], [1, 0]], dtype=DTYPE),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=DTYPE),
    "Z": np.array([[1, 0], [0, -1]], dtype=DTYPE),
}


@dataclass
class RandomSource:
    """Seeded, counter-based random stream.

    Built on numpy's Philox bit generator.  ``spawn(i)`` derives an
    independent substream keyed by ``(seed, i)``; trajectory ``i`` always sees
    the same numbers no matter which worker runs it or in which order.
    """

    seed: int
    stream: tuple[int, ...] = ()
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(int(self.seed), spawn_key=tuple(self.stream))
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def spawn(self, index: int) -> "RandomSource":
        return RandomSource(self.seed, tuple(self.stream) + (int(index),))

    def random(self) -> float:
        return float(self.generator.random())


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomSource):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise ValidationError(f"expected RandomSource or numpy Generator, got {type(rng).__name__}")


def num_qubits_of(state: np.ndarray) -> int:
    size = state.shape[0]
    n = size.bit_length() - 1
    if n < 1 or 1 << n != size:
        raise ValidationError(f"state length {size} is not 2**n with n >= 1")
    return n


def check_capacity(num_qubits: int) -> None:
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise CapacityError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")


def check_targets(targets: Sequence[int], num_qubits: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise QubitIndexError(f"duplicate qubit in {targets}")
    for t in targets:
        if not 0 <= t < num_qubits:
            raise QubitIndexError(f"qubit {t} out of range for {num_qubits} qubits")
    return targets


def is_unitary(matrix: np.ndarray, atol: float = ATOL) -> bool:
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol, rtol=0))


def zero_state(num_qubits: int) -> np.ndarray:
    check_capacity(num_qubits)
    state = np.zeros(1 << num_qubits, dtype=DTYPE)
    state[0] = 1.0
    return state


def basis_state(bits: str) -> np.ndarray:
    """Computational basis state from a bitstring (qubit 0 leftmost)."""
    check_capacity(len(bits))
    state = np.zeros(1 << len(bits), dtype=DTYPE)
    state[sum(int(b) << q for q, b in enumerate(bits))] = 1.0
    return state


def _views(arr: np.ndarray, n: int, targets: Sequence[int]) -> list[np.ndarray]:
    """Writable views of ``arr`` for each basis pattern of ``targets``.

    Pattern ``j`` sets ``targets[0]`` to the most significant bit of ``j``,
    matching the usual matrix convention for gates such as CNOT(control, target).
    The array is folded into at most ``2k+1`` axes so the views stay cheap.
    """
    desc = sorted(targets, reverse=True)
    shape, axis_of, prev = [], {}, n
    for q in desc:
        shape.append(1 << (prev - 1 - q))
        axis_of[q] = len(shape)
        shape.append(2)
        prev = q
    shape.append(1 << prev)
    t = arr.reshape(tuple(shape) + arr.shape[1:])
    views = []
    for bits in product((0, 1), repeat=len(targets)):
        idx = [slice(None)] * t.ndim
        for q, b in zip(targets, bits):
            idx[axis_of[q]] = b
        views.append(t[tuple(idx)])
    return views


def _is_controlled(gate: np.ndarray) -> bool:
    """True when ``gate`` is identity except for its trailing 2x2 block."""
    d = gate.shape[0]
    head = np.eye(d, dtype=gate.dtype)
    head[-2:, -2:] = gate[-2:, -2:]
    return bool(np.array_equal(head, gate))


def apply_inplace(arr: np.ndarray, n: int, gate: np.ndarray, targets: Sequence[int]) -> None:
    """Apply ``gate`` to ``targets`` of ``arr`` (shape ``(2**n, ...)``) in place.

    Works on strided views of the amplitude array; zero matrix entries are
    skipped, so permutation and diagonal gates touch only the moved blocks.
    """
    if arr.ndim == 1 and arr.flags.c_contiguous and arr.dtype == DTYPE:
        g = gate[-2:, -2:]
        if len(targets) == 1:
            _kernels.apply_1q(arr, int(targets[0]), g[0, 0], g[0, 1], g[1, 0], g[1, 1])
        elif _is_controlled(gate):
            mask = sum(1 << int(c) for c in targets[:-1])
            _kernels.apply_controlled_1q(arr, mask, int(targets[-1]), g[0, 0], g[0, 1], g[1, 0], g[1, 1])
        else:
            _kernels.apply_kq(arr, np.asarray(targets, dtype=np.int64), np.ascontiguousarray(gate, dtype=DTYPE))
        return
    views = _views(arr, n, targets)
    dim = len(views)
    rows = []
    for i in range(dim):
        nz = np.flatnonzero(gate[i])
        if len(nz) == 1 and nz[0] == i:
            if gate[i, i] != 1:
                views[i] *= gate[i, i]
            continue
        rows.append((i, nz))
    needed = {int(j) for _, nz in rows for j in nz}
    old = {j: views[j].copy() for j in needed}
    for i, nz in rows:
        row = gate[i]
        if len(nz) == 0:
            views[i][...] = 0
            continue
        acc = row[nz[0]] * old[int(nz[0])] if row[nz[0]] != 1 else old[int(nz[0])]
        for j in nz[1:]:
            acc = acc + row[j] * old[int(j)]
        views[i][...] = acc


def apply_unitary(state: np.ndarray, gate: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Return ``(gate on targets ⊗ I) @ state`` as a new array."""
    n = num_qubits_of(state)
    targets = check_targets(targets, n)
    gate = np.asarray(gate, dtype=DTYPE)
    if gate.shape != (1 << len(targets),) * 2:
        raise ValidationError(f"gate of shape {gate.shape} does not act on {len(targets)} qubits")
    if not is_unitary(gate):
        raise ValidationError("gate matrix is not unitary")
    out = np.array(state, dtype=DTYPE, copy=True)
    apply_inplace(out, n, gate, targets)
    return out


def probability_one(state: np.ndarray, qubit: int) -> float:
    n = num_qubits_of(state)
    check_targets([qubit], n)
    v = state.reshape(1 << (n - 1 - qubit), 2, 1 << qubit)
    return float(np.sum(np.abs(v[:, 1, :]) ** 2))


def project(state: np.ndarray, qubit: int, bit: int) -> tuple[float, np.ndarray]:
    """Collapse ``qubit`` onto ``bit``; returns (probability, normalized post-state)."""
    n = num_qubits_of(state)
    v = state.reshape(1 << (n - 1 - qubit), 2, 1 << qubit)
    out = np.zeros_like(v)
    out[:, bit, :] = v[:, bit, :]
    p = float(np.sum(np.abs(out) ** 2))
    if p < ZERO_BRANCH:
        return 0.0, out.reshape(-1)
    return p, (out / np.sqrt(p)).reshape(-1)


def measure_z(state: np.ndarray, qubit: int, rng) -> tuple[int, np.ndarray]:
    """Projective Z measurement of one qubit.

    A branch with probability below 1e-12 is never selected.
    """
    n = num_qubits_of(state)
    check_targets([qubit], n)
    p1 = probability_one(state, qubit)
    if p1 < ZERO_BRANCH:
        bit = 0
    elif 1 - p1 < ZERO_BRANCH:
        bit = 1
    else:
        bit = int(_generator(rng).random() < p1)
    _, post = project(state, qubit, bit)
    return bit, post


def marginal_probabilities(state: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Born probabilities of ``qubits``; entry ``m`` has ``qubits[j]`` in bit ``j`` of ``m``."""
    n = num_qubits_of(state)
    qubits = check_targets(qubits, n)
    probs = (np.abs(state) ** 2).reshape((2,) * n)
    keep = [n - 1 - q for q in qubits]
    other = tuple(a for a in range(n) if a not in keep)
    reduced = probs.sum(axis=other) if other else probs
    # remaining axes are in increasing axis order; reorder so qubits[0] is the last (LSB) axis
    remaining = sorted(keep)
    order = [remaining.index(a) for a in reversed(keep)]
    return np.transpose(reduced, order).reshape(-1)


def bitstring(index: int, width: int) -> str:
    return "".join(str((index >> j) & 1) for j in range(width))


def sample_outcomes(state: np.ndarray, qubits: Sequence[int], shots: int, rng) -> np.ndarray:
    """Draw ``shots`` outcome indices (encoding as in :func:`marginal_probabilities`)."""
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    p = marginal_probabilities(state, qubits)
    p = np.clip(p, 0, None)
    p[p < ZERO_BRANCH] = 0.0
    p /= p.sum()
    return _generator(rng).choice(len(p), size=shots, p=p)


def sample_counts(state: np.ndarray, qubits: Sequence[int], shots: int, rng) -> dict[str, int]:
    """Histogram of measured bitstrings; character ``j`` is the outcome of ``qubits[j]``."""
    outcomes = sample_outcomes(state, qubits, shots, rng)
    width = len(qubits)
    counts = np.bincount(outcomes, minlength=1 << width)
    return {bitstring(m, width): int(c) for m, c in enumerate(counts) if c}


def pure_density(state: np.ndarray) -> np.ndarray:
    num_qubits_of(state)
    return np.outer(state, state.conj())


def reduced_density(state: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of ``keep`` straight from a state vector.

    ``keep[j]`` becomes qubit ``j`` of the result.
    """
    n = num_qubits_of(state)
    if not keep:
        raise ValidationError("keep must name at least one qubit")
    keep = check_targets(keep, n)
    t = state.reshape((2,) * n)
    axes = [n - 1 - q for q in reversed(keep)]
    m = np.moveaxis(t, axes, list(range(len(keep)))).reshape(1 << len(keep), -1)
    return m @ m.conj().T


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    n = num_qubits_of(rho)
    if rho.shape != (1 << n, 1 << n):
        raise ValidationError(f"density matrix must be square, got {rho.shape}")
    if not keep:
        raise ValidationError("keep must name at least one qubit")
    keep = check_targets(keep, n)
    k = len(keep)
    t = rho.reshape((2,) * (2 * n))
    traced = [q for q in range(n) if q not in keep]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[i] for i in range(n)]
    col = [letters[n + i] for i in range(n)]
    for q in traced:
        col[n - 1 - q] = row[n - 1 - q]
    out_row = "".join(row[n - 1 - q] for q in reversed(keep))
    out_col = "".join(col[n - 1 - q] for q in reversed(keep))
    spec = f"{''.join(row)}{''.join(col)}->{out_row}{out_col}"
    return np.einsum(spec, t).reshape(1 << k, 1 << k)


def check_density(rho: np.ndarray, atol: float = 1e-9) -> None:
    """Raise unless ``rho`` is Hermitian, unit trace and positive semidefinite."""
    if not np.allclose(rho, rho.conj().T, atol=1e-10, rtol=0):
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > atol:
        raise ValidationError(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValidationError("density matrix has a negative eigenvalue")


def fidelity_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi|rho|psi> clamped to [0, 1]; equals squared Uhlmann fidelity for pure ``psi``."""
    if rho.shape != (psi.shape[0], psi.shape[0]):
        raise ValidationError(f"dimension mismatch: rho {rho.shape} vs psi {psi.shape}")
    f = float(np.real(np.vdot(psi, rho @ psi)))
    return min(1.0, max(0.0, f))


def apply_pauli_string(state: np.ndarray, pauli: str) -> np.ndarray:
    n = num_qubits_of(state)
    if len(pauli) != n:
        raise ValidationError(f"Pauli string {pauli!r} has length {len(pauli)}, state has {n} qubits")
    out = np.array(state, dtype=DTYPE, copy=True)
    for q, ch in enumerate(pauli):
        if ch not in PAULI:
            raise ValidationError(f"invalid Pauli character {ch!r} in {pauli!r}")
        if ch != "I":
            apply_inplace(out, n, PAULI[ch], [q])
    return out


def pauli_expectation(state: np.ndarray, pauli: str) -> float:
    """<psi|P|psi> for a Pauli string whose character ``q`` acts on qubit ``q``."""
    return float(np.real(np.vdot(state, apply_pauli_string(state, pauli))))


def format_ket(state: np.ndarray, atol: float = 1e-9) -> str:
    n = num_qubits_of(state)
    terms = []
    for i in np.flatnonzero(np.abs(state) > atol):
        a = state[i]
        terms.append(f"({a.real:+.6f}{a.imag:+.6f}j)|{bitstring(int(i), n)}>")
    return " ".join(terms) or "0"
