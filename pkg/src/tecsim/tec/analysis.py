"""Reading results out of the pipeline circuits.

All helpers rely on the metadata the builders attach: the output block, the
code, the message amplitudes, the decode basis and (in measured form) the
Pauli-frame rules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import qsim
from ..channels import NoiseModel, apply_noise
from ..circuit import Branch, Circuit, exact_distribution, simulate, unitary_of
from ..qsim import RandomSource
from .codes import decode_parity4, decode_repetition3, logical_state
from .frame import PauliFrame, apply_pauli_frame, frame_from_rules

DECODE = "decode"


@dataclass(frozen=True)
class SyndromeRecord:
    a1: int
    a2: int

    def as_tuple(self) -> tuple[int, int]:
        return (self.a1, self.a2)


def message_amplitudes(circuit: Circuit) -> np.ndarray:
    return np.array([complex(re, im) for re, im in circuit.metadata["message"]])


def target_state(circuit: Circuit) -> np.ndarray:
    """Ideal encoded message on the output block."""
    return logical_state(circuit.metadata["code"], message_amplitudes(circuit))


def _frame_for(circuit: Circuit, cbits: Sequence[int]) -> PauliFrame | None:
    rules = circuit.metadata.get("frame_rules")
    if not rules:
        return None
    return frame_from_rules(rules, cbits, len(circuit.metadata["output"]))


def _prefix_branches(circuit: Circuit) -> list[Branch]:
    prefix = circuit.prefix(DECODE) if DECODE in circuit.labels else circuit
    return simulate(prefix, 0).branches


def _framed_density(circuit: Circuit, branch: Branch) -> np.ndarray:
    out = circuit.metadata["output"]
    rho = qsim.reduced_density(branch.state, out)
    frame = _frame_for(circuit, branch.cbits)
    if frame is not None and (any(frame.x_mask) or any(frame.z_mask)):
        u = unitary_of(frame.gates())
        rho = u @ rho @ u.conj().T
    return rho


def output_density(circuit: Circuit) -> np.ndarray:
    """Exact state of the output block at the ``decode`` marker.

    In measured form the Pauli frame of every branch is applied before the
    branches are mixed.
    """
    return sum(b.probability * _framed_density(circuit, b) for b in _prefix_branches(circuit))


def decoded_fidelity(circuit: Circuit, rho: np.ndarray | None = None) -> float:
    """<psi_L|rho_out|psi_L> for the encoded message psi_L."""
    rho = output_density(circuit) if rho is None else rho
    return qsim.fidelity_pure(rho, target_state(circuit))


def decoder(circuit: Circuit) -> Circuit:
    return decode_repetition3() if circuit.metadata["code"] == "repetition3" else decode_parity4()


def decoded_qubit_density(circuit: Circuit, rho: np.ndarray | None = None) -> np.ndarray:
    """Single-qubit state obtained by running the code's decoder on the output block."""
    rho = output_density(circuit) if rho is None else rho
    u = unitary_of(decoder(circuit))
    return qsim.partial_trace(u @ rho @ u.conj().T, [0])


def syndrome(circuit: Circuit) -> SyndromeRecord:
    """Syndrome ancillas of the bit-flip pipeline at the ``decode`` marker.

    Raises ``ValueError`` if the outcome is not deterministic.
    """
    anc = circuit.metadata["syndrome_ancillas"]
    probs = np.zeros(4)
    for b in _prefix_branches(circuit):
        probs += b.probability * qsim.marginal_probabilities(b.state, anc)
    idx = int(np.argmax(probs))
    if probs[idx] < 1 - 1e-9:
        raise ValueError(f"syndrome is not deterministic: {probs}")
    return SyndromeRecord(idx & 1, (idx >> 1) & 1)


def logical_bit(circuit: Circuit, cbits: Sequence[int]) -> int:
    """Decoded logical value from one full classical record (frame applied)."""
    meta = circuit.metadata
    size = len(meta["output"])
    bits = tuple(int(b) for b in cbits[:size])
    frame = _frame_for(circuit, cbits)
    if frame is not None:
        bits = apply_pauli_frame(frame, bits, meta["decode_basis"])
    if meta["code"] == "repetition3":
        return int(sum(bits) >= 2)
    return sum(bits[i] for i in meta["logical_parity"]) & 1


def decoded_distribution(circuit: Circuit) -> dict[int, float]:
    """Exact probabilities of the decoded logical value."""
    dist = {0: 0.0, 1: 0.0}
    for cbits, p in exact_distribution(circuit).items():
        dist[logical_bit(circuit, cbits)] += p
    return dist


def sample_decoded(circuit: Circuit, shots: int, seed: int = 0, readout_error: float = 0.0) -> dict[int, int]:
    res = simulate(circuit, shots, seed, readout_error=readout_error)
    counts = {0: 0, 1: 0}
    for row in res.cbit_values:
        counts[logical_bit(circuit, row)] += 1
    return counts


def cbit_marginal(circuit: Circuit, cbits: Sequence[int]) -> dict[str, float]:
    """Exact distribution of a subset of classical bits."""
    out: dict[str, float] = {}
    for record, p in exact_distribution(circuit).items():
        key = "".join(str(record[i]) for i in cbits)
        out[key] = out.get(key, 0.0) + p
    return dict(sorted(out.items()))


@dataclass
class NoisyRun:
    """Trajectory average of the output block under a :class:`NoiseModel`."""

    rho: np.ndarray
    fidelities: list[float]

    @property
    def mean_fidelity(self) -> float:
        return float(np.mean(self.fidelities))


def noisy_output(circuit: Circuit, model: NoiseModel, trajectories: int, seed: int = 0) -> NoisyRun:
    """Average output density over ``trajectories`` noisy runs of the prefix.

    Trajectory ``i`` draws its Pauli errors from substream ``(seed, i)``.
    Readout errors do not enter here; they act when the output is sampled.
    """
    if trajectories < 1:
        raise ValueError(f"trajectories must be >= 1, got {trajectories}")
    prefix = circuit.prefix(DECODE)
    root = RandomSource(seed)
    psi = target_state(circuit)
    total = 0
    fids = []
    for i in range(trajectories):
        noisy = apply_noise(prefix, model, root.spawn(i))
        rho = sum(b.probability * _framed_density(circuit, b) for b in simulate(noisy, 0).branches)
        fids.append(qsim.fidelity_pure(rho, psi))
        total = total + rho
    return NoisyRun(total / trajectories, fids)


def decoded_fidelity_under_noise(circuit: Circuit, p: float, trajectories: int = 200,
                                 seed: int = 0) -> tuple[float, np.ndarray]:
    """Fidelity of the decoded qubit to the message with ``p1 = p2 = p``, and that qubit's state."""
    run = noisy_output(circuit, NoiseModel(p1=p, p2=p), trajectories, seed)
    dq = decoded_qubit_density(circuit, run.rho)
    return qsim.fidelity_pure(dq, message_amplitudes(circuit)), dq


def bisect_noise(circuit: Circuit, target: float, lo: float = 0.0, hi: float = 0.05,
                 trajectories: int = 200, seed: int = 0, tol: float = 0.01,
                 max_steps: int = 20) -> tuple[float, float, np.ndarray]:
    """Noise strength whose decoded-qubit fidelity lies within ``tol`` of ``target``.

    Every evaluation reuses ``seed``, so the fidelity is a deterministic and
    (up to trajectory noise) monotone function of ``p``.  Returns
    ``(p, fidelity, decoded_state)``.
    """
    f_hi, _ = decoded_fidelity_under_noise(circuit, hi, trajectories, seed)
    if f_hi > target:
        raise ValueError(f"fidelity {f_hi:.4f} at p={hi} is still above the target {target}")
    for _ in range(max_steps):
        mid = (lo + hi) / 2
        f, dq = decoded_fidelity_under_noise(circuit, mid, trajectories, seed)
        if abs(f - target) <= tol:
            return mid, f, dq
        if f > target:
            lo = mid
        else:
            hi = mid
    raise ValueError(f"no noise strength in [{lo}, {hi}] reaches fidelity {target} within {tol}")
