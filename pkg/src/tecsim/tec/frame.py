"""Pauli-frame bookkeeping: classical stand-in for the coherent conditionals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..circuit import Circuit
from ..errors import ValidationError


@dataclass(frozen=True)
class PauliFrame:
    """Pending X and Z corrections, one bit per qubit of the output block."""

    x_mask: tuple[int, ...]
    z_mask: tuple[int, ...]

    def __post_init__(self):
        x = tuple(int(b) & 1 for b in self.x_mask)
        z = tuple(int(b) & 1 for b in self.z_mask)
        if len(x) != len(z):
            raise ValidationError(f"mask sizes differ: {len(x)} vs {len(z)}")
        object.__setattr__(self, "x_mask", x)
        object.__setattr__(self, "z_mask", z)

    @classmethod
    def identity(cls, size: int) -> "PauliFrame":
        return cls((0,) * size, (0,) * size)

    @property
    def size(self) -> int:
        return len(self.x_mask)

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        """Product of two frames (phases dropped): masks XOR."""
        if other.size != self.size:
            raise ValidationError(f"frame sizes differ: {self.size} vs {other.size}")
        return PauliFrame(tuple(a ^ b for a, b in zip(self.x_mask, other.x_mask)),
                          tuple(a ^ b for a, b in zip(self.z_mask, other.z_mask)))

    __matmul__ = compose

    def gates(self) -> Circuit:
        """Fragment applying the frame as physical X/Z gates."""
        frag = Circuit(self.size)
        for q in range(self.size):
            if self.x_mask[q]:
                frag.x(q)
            if self.z_mask[q]:
                frag.z(q)
        return frag


def frame_from_rules(rules: Iterable[Sequence], cbits: Sequence[int], size: int) -> PauliFrame:
    """Build a frame from measured bits.

    Each rule ``(cbit, out_index, pauli)`` says "if classical bit ``cbit`` is 1,
    apply ``pauli`` to output qubit ``out_index``"; this is exactly what a
    coherent CNOT (``X``) or CZ (``Z``) from the measured qubit would do.
    """
    x = [0] * size
    z = [0] * size
    for cbit, out, pauli in rules:
        if not cbits[cbit]:
            continue
        if pauli == "X":
            x[out] ^= 1
        elif pauli == "Z":
            z[out] ^= 1
        else:
            raise ValidationError(f"frame rule Pauli must be X or Z, got {pauli!r}")
    return PauliFrame(tuple(x), tuple(z))


def apply_pauli_frame(frame: PauliFrame, measured_bits: Sequence[int], basis: str | None = None) -> tuple[int, ...]:
    """Correct bits measured on the output block.

    A bit read in the Z basis is flipped by a pending X; one read in the X
    basis is flipped by a pending Z.  ``basis`` defaults to all Z.
    """
    if len(measured_bits) != frame.size:
        raise ValidationError(f"{len(measured_bits)} bits for a frame of size {frame.size}")
    basis = basis or "Z" * frame.size
    if len(basis) != frame.size or set(basis) - {"X", "Z"}:
        raise ValidationError(f"basis must be {frame.size} characters over X/Z, got {basis!r}")
    out = []
    for b, x, z, ax in zip(measured_bits, frame.x_mask, frame.z_mask, basis):
        flip = x if ax == "Z" else z
        out.append(int(b) ^ flip)
    return tuple(out)
