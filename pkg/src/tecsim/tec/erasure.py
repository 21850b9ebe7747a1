"""Teleportation-based correction of a single erasure with the 4-qubit parity code.

Register (16 qubits; the device variant drops to 14)::

    0-3    message, parity-encoded
    4-7    first half of the logical Bell pair
    8-11   second half; the message ends up here
    12-15  QND ancillas: 12,13 check Z0Z1 and 14,15 check Z2Z3
           (device variant: 12 checks Z0Z1, 13 checks Z2Z3)

The QND block copies the pair parities Z0Z1 and Z2Z3 of the message block
onto ancillas.  Both are stabilizers, so without an erasure the ancillas read
0 and the code is untouched.  An erased qubit no longer feeds its ancilla,
which then reads the partner's Z alone (random), flagging the pair.  The
teleportation conditionals use logical representatives that avoid the erased
position, so the missing qubit never matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..channels import ErrorKind, ErrorSpec, inject
from ..circuit import Circuit
from ..errors import UncorrectableError, ValidationError
from .codes import (
    DEFAULT_PARAMS,
    ERASURE_DEVICE_LAYOUT,
    ERASURE_LAYOUT,
    BlockLayout,
    ErasureFlag,
    MessageMode,
    MessageParams,
    encode_parity4,
    message_state,
    prepare_logical_bell_erasure,
    prepare_message,
    select_logical_representatives,
    support,
)

CHANNEL = "eps"
DECODE = "decode"
# representatives used on the outgoing block, which is never erased
OUT_X_REP = "IZIZ"
OUT_Z_REP = "IIXX"
DECODE_BASIS = "ZZXX"


@dataclass(frozen=True)
class QNDCheck:
    """One ancilla reading the parity of two message-block positions."""

    ancilla: int
    pair: tuple[int, int]


def qnd_checks(layout: BlockLayout, device: bool | None = None) -> list[QNDCheck]:
    """Ancilla assignment; ``device`` defaults to ``len(layout.ancilla) == 2``."""
    if len(layout.message) != 4:
        raise ValidationError(f"erasure layout needs a 4-qubit message block, got {len(layout.message)}")
    device = len(layout.ancilla) == 2 if device is None else device
    need = 2 if device else 4
    if len(layout.ancilla) != need:
        raise ValidationError(f"{'device' if device else 'full'} QND needs {need} ancillas, got {len(layout.ancilla)}")
    pairs = [(0, 1), (2, 3)] if device else [(0, 1), (0, 1), (2, 3), (2, 3)]
    return [QNDCheck(a, p) for a, p in zip(layout.ancilla, pairs)]


def qnd_detect(layout: BlockLayout = ERASURE_LAYOUT, device: bool | None = None) -> Circuit:
    """CNOTs from each checked message qubit onto its QND ancilla."""
    frag = Circuit(layout.num_qubits)
    for chk in qnd_checks(layout, device):
        for pos in chk.pair:
            frag.cx(layout.message[pos], chk.ancilla)
    return frag


def extract_erasure_flag(ancilla_bits: Sequence[int], hint: Sequence[int] = (),
                         layout: BlockLayout = ERASURE_LAYOUT, device: bool | None = None) -> ErasureFlag:
    """Map QND readings plus the channel's location hint to an :class:`ErasureFlag`.

    A pair "fires" when any of its ancillas reads 1.  The QND block only
    localizes an erasure to a pair (and fires with probability 1/2), so the
    channel's hint picks the qubit; erasures are located errors by
    definition.  The readings must be consistent with the hint:

    * no hint, nothing fired: no erasure;
    * hint inside the only fired pair: flag the hint;
    * hint, nothing fired: flag the hint, marked ``ambiguous``;
    * anything else: :class:`UncorrectableError`.
    """
    checks = qnd_checks(layout, device)
    if len(ancilla_bits) != len(checks):
        raise ValidationError(f"expected {len(checks)} ancilla bits, got {len(ancilla_bits)}")
    hint = frozenset(int(h) for h in hint)
    if len(hint) > 1:
        raise UncorrectableError(f"{len(hint)} erasures {sorted(hint)}; the code corrects one")
    fired = {chk.pair for chk, bit in zip(checks, ancilla_bits) if bit}
    if not fired:
        return ErasureFlag(hint, ambiguous=bool(hint))
    if not hint:
        raise UncorrectableError(f"QND pairs {sorted(fired)} fired without an erasure location")
    (k,) = hint
    if len(fired) > 1 or k not in next(iter(fired)):
        raise UncorrectableError(f"QND pairs {sorted(fired)} are inconsistent with erasure at {k}")
    return ErasureFlag(hint)


def teleport_conditionals_erasure(layout: BlockLayout, flag: ErasureFlag = ErasureFlag()) -> Circuit:
    """Coherent logical-Bell-measurement corrections avoiding the flagged qubit.

    The transversal CNOT message -> bell_first acts on the logical level as a
    CNOT with the roles reversed, so the message block is read out through
    its logical Z and the first Bell block through its logical X:

    * logical X of ``bell_first`` (a Z-type string) controls logical Z
      (``IIXX``) on the output: one CNOT per (control, target) pair;
    * logical Z of the message (an X-type string) controls logical X
      (``IZIZ``) on the output: Hadamard on each control, then a CZ per pair
      written as H-CNOT-H.
    """
    x_rep, z_rep = select_logical_representatives(flag)
    frag = Circuit(layout.num_qubits)
    for c in support(x_rep):
        for t in support(OUT_Z_REP):
            frag.cx(layout.bell_first[c], layout.bell_second[t])
    for c in support(z_rep):
        m = layout.message[c]
        frag.h(m)
        for t in support(OUT_X_REP):
            b = layout.bell_second[t]
            frag.h(b).cx(m, b).h(b)
    return frag


def measured_conditionals_erasure(layout: BlockLayout, flag: ErasureFlag,
                                  first_cbit: int) -> tuple[Circuit, list[list]]:
    """Measured form of :func:`teleport_conditionals_erasure` plus its frame rules."""
    x_rep, z_rep = select_logical_representatives(flag)
    xs, zs = support(x_rep), support(z_rep)
    frag = Circuit(layout.num_qubits, first_cbit + len(xs) + len(zs))
    rules = []
    cbit = first_cbit
    for c in xs:
        frag.measure(layout.bell_first[c], cbit)
        rules += [[cbit, t, "X"] for t in support(OUT_Z_REP)]
        cbit += 1
    for c in zs:
        frag.h(layout.message[c]).measure(layout.message[c], cbit)
        rules += [[cbit, t, "Z"] for t in support(OUT_X_REP)]
        cbit += 1
    return frag, rules


def build_erasure_tec_circuit(spec: ErrorSpec | None = None, *, params: MessageParams = DEFAULT_PARAMS,
                              message_mode: MessageMode | str = MessageMode.ROTATION,
                              conditionals: str = "coherent", device_faithful: bool = False,
                              layout: BlockLayout | None = None, measure: bool = True) -> Circuit:
    """Full erasure pipeline; an erasure in ``spec`` is applied at the channel marker.

    Classical bits: 0-3 the output block (read as Z, Z, X, X; the logical
    value is the parity of bits 2 and 3), then one bit per QND ancilla, then
    the measured conditionals when ``conditionals="measured"``.
    """
    spec = spec or ErrorSpec()
    if spec.kind not in (ErrorKind.NONE, ErrorKind.ERASURE):
        raise ValidationError(f"this pipeline takes errors of kind None or Erasure, got {spec.kind.value}")
    if conditionals not in ("coherent", "measured"):
        raise ValidationError(f"conditionals must be 'coherent' or 'measured', got {conditionals!r}")
    if layout is None:
        layout = ERASURE_DEVICE_LAYOUT if device_faithful else ERASURE_LAYOUT
    checks = qnd_checks(layout)
    hint = () if spec.kind is ErrorKind.NONE else (spec.qubit,)
    if hint and not 0 <= spec.qubit < 4:
        raise ValidationError(f"erased qubit {spec.qubit} is outside the 4-qubit message block")
    flag = ErasureFlag(frozenset(hint))
    x_rep, z_rep = select_logical_representatives(flag)

    msg, bf, bs = layout.message, layout.bell_first, layout.bell_second
    n_anc = len(checks)
    n_meas = len(support(x_rep)) + len(support(z_rep)) if conditionals == "measured" else 0
    amps = message_state(params, message_mode)
    c = Circuit(layout.num_qubits, 4 + n_anc + n_meas, metadata={
        "pipeline": "erasure",
        "code": "parity4",
        "layout": layout.to_json(),
        "message": [[float(a.real), float(a.imag)] for a in amps],
        "message_mode": MessageMode(message_mode).value,
        "output": list(bs),
        "decode_basis": DECODE_BASIS,
        "logical_parity": support(OUT_Z_REP),
        "conditionals": conditionals,
        "device_faithful": len(checks) == 2,
        "qnd": [{"ancilla": chk.ancilla, "pair": list(chk.pair), "cbit": 4 + i} for i, chk in enumerate(checks)],
        "representatives": [x_rep, z_rep],
    })
    # A: message and encoding
    c.compose(prepare_message(params, message_mode), [msg[0]])
    c.compose(encode_parity4(), list(msg))
    # B: logical Bell pair
    c.compose(prepare_logical_bell_erasure(), list(bf) + list(bs))
    c.marker(CHANNEL, msg)
    # C: QND erasure check
    c.compose(qnd_detect(layout))
    # D: transversal CNOT
    for m, a in zip(msg, bf):
        c.cx(m, a)
    # E: conditionals
    if conditionals == "coherent":
        c.compose(teleport_conditionals_erasure(layout, flag))
    else:
        frag, rules = measured_conditionals_erasure(layout, flag, first_cbit=4 + n_anc)
        c.compose(frag)
        c.metadata["frame_rules"] = rules
    # F: read out the outgoing block; ancillas last so the prefix stays measurement-free
    c.marker(DECODE, bs)
    if measure:
        for i, (q, basis) in enumerate(zip(bs, DECODE_BASIS)):
            if basis == "X":
                c.h(q)
            c.measure(q, i)
        for i, chk in enumerate(checks):
            c.measure(chk.ancilla, 4 + i)
    if spec.kind is ErrorKind.ERASURE:
        c = inject(c, spec)
    return c
