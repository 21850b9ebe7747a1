"""Message preparation, encoders and logical operators of the two codes.

Repetition code (bit-flip pipeline)::

    |0>_L = |000>,  |1>_L = |111>

Parity/redundancy code (erasure pipeline), qubits 0..3 paired as (0,1), (2,3)::

    |0>_L = (|00>+|11>)(|00>+|11>)/2
    |1>_L = (|00>-|11>)(|00>-|11>)/2

Its stabilizers are ZZII, IIZZ and XXXX.  Logical X has the Z-type
representatives IZIZ and ZIZI, logical Z the X-type representatives IIXX and
XXII, so any single qubit can be avoided when reading the logical value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from ..circuit import Circuit, statevector
from ..errors import UncorrectableError, ValidationError
from ..qsim import DTYPE, basis_state


class MessageMode(str, Enum):
    ROTATION = "Rotation"
    PAPER_SEQUENCE = "PaperSequence"


@dataclass(frozen=True)
class MessageParams:
    """Real amplitudes of the message ``alpha|0> + beta|1>``."""

    alpha: float = math.cos(math.pi / 8)
    beta: float = math.sin(math.pi / 8)

    def __post_init__(self):
        if abs(self.alpha**2 + self.beta**2 - 1) > 1e-10:
            raise ValidationError(f"alpha^2 + beta^2 must be 1, got {self.alpha**2 + self.beta**2}")

    @property
    def theta(self) -> float:
        """Ry angle taking |0> to the message."""
        return 2 * math.atan2(self.beta, self.alpha)


DEFAULT_PARAMS = MessageParams()


def prepare_message(params: MessageParams = DEFAULT_PARAMS,
                    mode: MessageMode | str = MessageMode.ROTATION) -> Circuit:
    """One-qubit fragment preparing the message from |0>.

    ``PaperSequence`` is the literal T, H, S gate sequence; it yields
    (|0> + i|1>)/sqrt(2) whatever ``params`` say.
    """
    mode = MessageMode(mode)
    frag = Circuit(1)
    if mode is MessageMode.PAPER_SEQUENCE:
        return frag.t(0).h(0).s(0)
    if params.theta != 0.0:
        frag.ry(params.theta, 0)
    return frag


def message_state(params: MessageParams = DEFAULT_PARAMS,
                  mode: MessageMode | str = MessageMode.ROTATION) -> np.ndarray:
    return statevector(prepare_message(params, mode))


def encode_repetition3() -> Circuit:
    """alpha|0>+beta|1> on qubit 0 (qubits 1, 2 fresh) -> alpha|000>+beta|111>."""
    return Circuit(3).cx(0, 1).cx(0, 2)


def prepare_logical_bell_3() -> Circuit:
    """(|000000> + |111111>)/sqrt(2) on six fresh qubits."""
    frag = Circuit(6).h(0)
    for t in range(1, 6):
        frag.cx(0, t)
    return frag


def encode_parity4() -> Circuit:
    """alpha|0>+beta|1> on qubit 0 (qubits 1..3 fresh) -> alpha|0>_L + beta|1>_L."""
    return (Circuit(4)
            .cx(0, 1).cx(0, 2).cx(0, 3).cx(0, 1).cx(2, 3)
            .h(0).h(2)
            .cx(0, 1).cx(2, 3))


def decode_parity4() -> Circuit:
    """Inverse of :func:`encode_parity4`; leaves the logical qubit on qubit 0."""
    enc = encode_parity4()
    # every gate in the encoder is self-inverse
    return enc.copy(reversed(enc.ops))


def decode_repetition3() -> Circuit:
    return encode_repetition3()


def prepare_logical_bell_erasure() -> Circuit:
    """(|0>_L|0>_L + |1>_L|1>_L)/sqrt(2) on eight fresh qubits (blocks 0..3, 4..7).

    A physical Bell pair on qubits 0 and 4, then each half is encoded.
    """
    frag = Circuit(8).h(0).cx(0, 4)
    frag.compose(encode_parity4(), [0, 1, 2, 3])
    frag.compose(encode_parity4(), [4, 5, 6, 7])
    return frag


# Gate list for the erasure-code Bell block as printed with the circuit
# (register positions 4..11 relabelled to 0..7).  It does not produce the
# logical Bell state; kept only so the discrepancy stays checkable.
PRINTED_BELL_ERASURE_GATES = (
    ("H", 0), ("H", 7), ("CNOT", 0, 1), ("CNOT", 0, 2), ("CNOT", 7, 6), ("CNOT", 7, 5),
    ("CNOT", 2, 3), ("CNOT", 5, 4), ("H", 5), ("X", 5), ("CNOT", 5, 3), ("CNOT", 5, 2),
)


def printed_bell_erasure() -> Circuit:
    frag = Circuit(8)
    for kind, *qs in PRINTED_BELL_ERASURE_GATES:
        frag.add(kind, *qs)
    return frag


# ---------------------------------------------------------------------------
# code states


def _pair(sign: int) -> np.ndarray:
    return basis_state("00") + sign * basis_state("11")


def _on_blocks(*vectors: np.ndarray) -> np.ndarray:
    """Tensor product with ``vectors[0]`` on the lowest-numbered qubits."""
    out = np.ones(1, dtype=DTYPE)
    for v in vectors:
        out = np.kron(v, out)
    return out


def repetition_codewords() -> tuple[np.ndarray, np.ndarray]:
    return basis_state("000"), basis_state("111")


def parity4_codewords() -> tuple[np.ndarray, np.ndarray]:
    zero = _on_blocks(_pair(+1), _pair(+1)) / 2
    one = _on_blocks(_pair(-1), _pair(-1)) / 2
    return zero, one


CODEWORDS = {"repetition3": repetition_codewords, "parity4": parity4_codewords}


def logical_state(code: str, amplitudes: Sequence[complex]) -> np.ndarray:
    zero, one = CODEWORDS[code]()
    return amplitudes[0] * zero + amplitudes[1] * one


def logical_bell_state(code: str) -> np.ndarray:
    zero, one = CODEWORDS[code]()
    return (_on_blocks(zero, zero) + _on_blocks(one, one)) / np.sqrt(2)


# ---------------------------------------------------------------------------
# logical operators of the parity code

X_LOGICAL_REPS = ("IZIZ", "ZIZI")
Z_LOGICAL_REPS = ("IIXX", "XXII")
STABILIZERS = ("ZZII", "IIZZ", "XXXX")


@dataclass(frozen=True)
class ErasureFlag:
    """Erased message-block positions (at most one for this code).

    ``ambiguous`` marks a location taken from the channel's hint because the
    QND ancillas did not fire.
    """

    erased: frozenset[int] = frozenset()
    ambiguous: bool = False

    def __post_init__(self):
        object.__setattr__(self, "erased", frozenset(int(q) for q in self.erased))


def _support(rep: str) -> set[int]:
    return {i for i, ch in enumerate(rep) if ch != "I"}


def support(rep: str) -> list[int]:
    return sorted(_support(rep))


def select_logical_representatives(flag: ErasureFlag | Iterable[int] = ()) -> tuple[str, str]:
    """(X_L, Z_L) representatives whose support avoids the erased qubit.

    With nothing erased the defaults are IZIZ and IIXX.
    """
    erased = flag.erased if isinstance(flag, ErasureFlag) else frozenset(flag)
    if len(erased) > 1:
        raise UncorrectableError(f"{len(erased)} erasures {sorted(erased)}; the code corrects one")
    for q in erased:
        if not 0 <= q < 4:
            raise ValidationError(f"erased position {q} is outside the 4-qubit block")
    x_rep = next(r for r in X_LOGICAL_REPS if not _support(r) & erased)
    z_rep = next(r for r in Z_LOGICAL_REPS if not _support(r) & erased)
    return x_rep, z_rep


# ---------------------------------------------------------------------------
# register layout


@dataclass(frozen=True)
class BlockLayout:
    """Physical positions of the message, the two Bell halves and the ancillas."""

    message: tuple[int, ...]
    bell_first: tuple[int, ...]
    bell_second: tuple[int, ...]
    ancilla: tuple[int, ...]

    def __post_init__(self):
        for name in ("message", "bell_first", "bell_second", "ancilla"):
            object.__setattr__(self, name, tuple(int(q) for q in getattr(self, name)))
        allq = self.message + self.bell_first + self.bell_second + self.ancilla
        if len(set(allq)) != len(allq):
            raise ValidationError(f"blocks overlap: {self}")
        if not len(self.message) == len(self.bell_first) == len(self.bell_second):
            raise ValidationError("message and Bell blocks must have the same size")

    @property
    def num_qubits(self) -> int:
        return max(self.message + self.bell_first + self.bell_second + self.ancilla) + 1

    def sizes(self) -> tuple[int, int, int, int]:
        return (len(self.message), len(self.bell_first), len(self.bell_second), len(self.ancilla))

    def to_json(self) -> dict:
        return {k: list(getattr(self, k)) for k in ("message", "bell_first", "bell_second", "ancilla")}

    @classmethod
    def from_json(cls, d: dict) -> "BlockLayout":
        return cls(d["message"], d["bell_first"], d["bell_second"], d["ancilla"])


BITFLIP_LAYOUT = BlockLayout((0, 1, 2), (3, 4, 5), (6, 7, 8), (9, 10))
ERASURE_LAYOUT = BlockLayout((0, 1, 2, 3), (4, 5, 6, 7), (8, 9, 10, 11), (12, 13, 14, 15))
# 14-qubit register of the physical device: one QND ancilla per pair
ERASURE_DEVICE_LAYOUT = BlockLayout((0, 1, 2, 3), (4, 5, 6, 7), (8, 9, 10, 11), (12, 13))
