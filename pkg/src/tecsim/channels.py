"""Error injection at channel markers and a gate-located Pauli noise model."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .circuit import Circuit, GateOp
from .errors import UncorrectableError, ValidationError
from .qsim import RandomSource

DEFAULT_MARKER = "eps"


class ErrorKind(str, Enum):
    NONE = "None"
    BIT_FLIP = "BitFlip"
    PHASE_FLIP = "PhaseFlip"
    BIT_PHASE_FLIP = "BitPhaseFlip"
    ERASURE = "Erasure"


class ErasureMode(str, Enum):
    GATE_REMOVAL = "GateRemoval"
    RESET_AND_FLAG = "ResetAndFlag"


PAULI_FOR_KIND = {
    ErrorKind.BIT_FLIP: "X",
    ErrorKind.PHASE_FLIP: "Z",
    ErrorKind.BIT_PHASE_FLIP: "Y",
}


@dataclass(frozen=True)
class ErrorSpec:
    """Which error hits which qubit of the block guarded by ``marker``.

    ``qubit`` indexes the marker's qubit list (block-relative), not the
    physical register.
    """

    kind: ErrorKind = ErrorKind.NONE
    qubit: int | None = None
    marker: str = DEFAULT_MARKER
    erasure_mode: ErasureMode | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ErrorKind(self.kind))
        if self.erasure_mode is not None:
            object.__setattr__(self, "erasure_mode", ErasureMode(self.erasure_mode))
        if self.kind is ErrorKind.ERASURE and self.erasure_mode is None:
            object.__setattr__(self, "erasure_mode", ErasureMode.GATE_REMOVAL)
        if (self.kind is ErrorKind.ERASURE) != (self.erasure_mode is not None):
            raise ValidationError("erasure_mode is set iff kind is Erasure")
        if (self.kind is ErrorKind.NONE) != (self.qubit is None):
            raise ValidationError("qubit is required for every kind except None")
        if self.qubit is not None and self.qubit < 0:
            raise ValidationError(f"qubit must be non-negative, got {self.qubit}")

    @classmethod
    def none(cls) -> "ErrorSpec":
        return cls()

    def to_json(self) -> dict:
        d = {"kind": self.kind.value, "qubit": self.qubit, "marker": self.marker}
        if self.erasure_mode is not None:
            d["erasure_mode"] = self.erasure_mode.value
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ErrorSpec":
        unknown = set(d) - {"kind", "qubit", "marker", "erasure_mode"}
        if unknown:
            raise ValidationError(f"unknown ErrorSpec field(s): {sorted(unknown)}")
        try:
            return cls(ErrorKind(d.get("kind", "None")), d.get("qubit"),
                       d.get("marker", DEFAULT_MARKER), d.get("erasure_mode"))
        except ValueError as e:
            raise ValidationError(f"bad ErrorSpec {d!r}: {e}") from None


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing-style Pauli noise after gates plus symmetric readout flips."""

    p1: float = 0.0
    p2: float = 0.0
    p_readout: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_readout"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {v}")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and self.p_readout == 0


def _block_qubit(circuit: Circuit, marker: str, qubit: int) -> tuple[int, int]:
    idx = circuit.marker_index(marker)
    block = circuit.ops[idx].qubits
    if not 0 <= qubit < len(block):
        raise ValidationError(f"qubit {qubit} is outside block {block} of marker {marker!r}")
    return idx, block[qubit]


def inject(circuit: Circuit, spec: ErrorSpec) -> Circuit:
    """Insert the error described by ``spec`` right after its marker.

    Operational errors only insert one Pauli; erasures go through :func:`erase`.
    """
    if spec.kind is ErrorKind.NONE:
        return circuit.copy()
    if spec.kind is ErrorKind.ERASURE:
        return erase(circuit, spec.qubit, spec.erasure_mode, marker=spec.marker)[0]
    idx, phys = _block_qubit(circuit, spec.marker, spec.qubit)
    ops = list(circuit.ops)
    ops.insert(idx + 1, GateOp(PAULI_FOR_KIND[spec.kind], (phys,)))
    out = circuit.copy(ops)
    out.metadata.setdefault("errors", []).append(spec.to_json())
    return out


def erase(circuit: Circuit, qubit: int, mode: ErasureMode | str = ErasureMode.GATE_REMOVAL,
          marker: str = DEFAULT_MARKER) -> tuple[Circuit, frozenset[int]]:
    """Erase message-block qubit ``qubit`` at ``marker``.

    ``GateRemoval`` deletes every gate on the qubit after the marker, so it
    never interacts again (the QND check, logical CNOT and conditionals all
    skip it).  ``ResetAndFlag`` inserts a Reset at the marker and leaves the
    later gates acting on the fresh ``|0>``.  Both return the erased location,
    which an erasure channel always reveals.  Only one erasure per circuit.
    """
    mode = ErasureMode(mode)
    if circuit.metadata.get("erased"):
        raise UncorrectableError("circuit already carries an erasure; the code corrects one")
    idx, phys = _block_qubit(circuit, marker, qubit)
    ops = list(circuit.ops[: idx + 1])
    tail = circuit.ops[idx + 1:]
    if mode is ErasureMode.GATE_REMOVAL:
        ops += [op for op in tail if op.kind == "Marker" or phys not in op.qubits]
    else:
        ops.append(GateOp("Reset", (phys,)))
        ops += tail
    out = circuit.copy(ops)
    out.metadata["erased"] = [qubit]
    out.metadata["erasure_mode"] = mode.value
    return out, frozenset({qubit})


def erase_unchecked(circuit: Circuit, qubits, mode=ErasureMode.GATE_REMOVAL,
                    marker: str = DEFAULT_MARKER) -> Circuit:
    """Erase several qubits at once, bypassing the single-erasure guard.

    For demonstrating that two erasures exceed the code.
    """
    out = circuit
    for q in qubits:
        out = erase(out, q, mode, marker)[0]
        out.metadata["erased"] = []
    out.metadata["erased"] = sorted(qubits)
    return out


_PAULIS = ("X", "Y", "Z")


def apply_noise(circuit: Circuit, model: NoiseModel, rng: RandomSource) -> Circuit:
    """Sample one noisy trajectory of ``circuit``.

    After every gate, each touched qubit independently receives a uniformly
    chosen non-identity Pauli with probability ``p1`` (single-qubit gates) or
    ``p2`` (multi-qubit gates).  Two random numbers are drawn per touched
    qubit whether or not an error fires, so runs at different strengths with
    the same seed share their random numbers.  Readout flips happen at
    sampling time (``simulate(..., readout_error=model.p_readout)``).
    """
    gen = rng.generator
    ops: list[GateOp] = []
    for op in circuit.ops:
        ops.append(op)
        if not op.is_unitary:
            continue
        p = model.p1 if len(op.qubits) == 1 else model.p2
        for q in op.qubits:
            u, k = gen.random(), gen.integers(3)
            if u < p:
                ops.append(GateOp(_PAULIS[k], (q,)))
    out = circuit.copy(ops)
    out.metadata["noise"] = {"p1": model.p1, "p2": model.p2, "p_readout": model.p_readout}
    return out
