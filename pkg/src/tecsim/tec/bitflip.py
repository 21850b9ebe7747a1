"""Teleportation-based correction of a single bit-flip (or, with a basis change, phase-flip).

Register (11 qubits)::

    0-2   message, repetition-encoded
    3-5   first half of the logical Bell pair (receives the syndrome check)
    6-8   second half; the corrected message ends up here
    9,10  syndrome ancillas for Z1Z2 and Z1Z3 of qubits 3-5
"""

from __future__ import annotations

from ..channels import ErrorKind, ErrorSpec, inject
from ..circuit import Circuit
from ..errors import ValidationError
from .codes import (
    BITFLIP_LAYOUT,
    DEFAULT_PARAMS,
    BlockLayout,
    MessageMode,
    MessageParams,
    encode_repetition3,
    message_state,
    prepare_logical_bell_3,
    prepare_message,
)

CHANNEL = "eps"
DECODE = "decode"


def _check_layout(layout: BlockLayout) -> None:
    if layout.sizes() != (3, 3, 3, 2):
        raise ValidationError(f"bit-flip layout needs block sizes (3,3,3,2), got {layout.sizes()}")


def syndrome_extract(layout: BlockLayout = BITFLIP_LAYOUT) -> Circuit:
    """Copy the parities q1^q2 and q1^q3 of ``bell_first`` onto the two ancillas."""
    _check_layout(layout)
    q1, q2, q3 = layout.bell_first
    a1, a2 = layout.ancilla
    return Circuit(layout.num_qubits).cx(q1, a1).cx(q2, a1).cx(q1, a2).cx(q3, a2)


def coherent_correct(layout: BlockLayout = BITFLIP_LAYOUT) -> Circuit:
    """Undo a single X on ``bell_first`` using the ancillas as controls.

    Syndrome (1,0) flips q2 and (0,1) flips q3 through the two CNOTs.  For
    (1,1) those CNOTs flip q2 and q3 as well; the three Toffolis then flip q1
    and restore q2 and q3.
    """
    _check_layout(layout)
    q1, q2, q3 = layout.bell_first
    a1, a2 = layout.ancilla
    return (Circuit(layout.num_qubits)
            .cx(a1, q2).cx(a2, q3)
            .ccx(a1, a2, q1).ccx(a1, a2, q2).ccx(a1, a2, q3))


def logical_cnot(layout: BlockLayout) -> Circuit:
    frag = Circuit(layout.num_qubits)
    for m, a in zip(layout.message, layout.bell_first):
        frag.cx(m, a)
    return frag


def teleport_conditionals_3(layout: BlockLayout = BITFLIP_LAYOUT) -> Circuit:
    """Coherent stand-in for the logical Bell measurement and its corrections.

    Z-basis part: CNOT from each ``bell_first`` qubit onto its partner in
    ``bell_second``.  X-basis part: Hadamard on each message qubit, then a
    controlled-Z (as H-CNOT-H) onto the partner in ``bell_second``.
    """
    _check_layout(layout)
    frag = Circuit(layout.num_qubits)
    for a, b in zip(layout.bell_first, layout.bell_second):
        frag.cx(a, b)
    for m in layout.message:
        frag.h(m)
    for m, b in zip(layout.message, layout.bell_second):
        frag.h(b).cx(m, b).h(b)
    return frag


def measured_conditionals_3(layout: BlockLayout, first_cbit: int) -> tuple[Circuit, list[list]]:
    """Measure the message in X and ``bell_first`` in Z instead of correcting coherently.

    Returns the fragment and the frame rules ``[cbit, output_index, pauli]``
    equivalent to :func:`teleport_conditionals_3`.
    """
    frag = Circuit(layout.num_qubits, first_cbit + 6)
    rules = []
    for i, m in enumerate(layout.message):
        frag.h(m).measure(m, first_cbit + i)
        rules.append([first_cbit + i, i, "Z"])
    for i, a in enumerate(layout.bell_first):
        frag.measure(a, first_cbit + 3 + i)
        rules.append([first_cbit + 3 + i, i, "X"])
    return frag, rules


def _build(spec: ErrorSpec | None, allowed: ErrorKind, phase_basis: bool, params: MessageParams,
           message_mode: MessageMode | str, conditionals: str, layout: BlockLayout,
           measure: bool) -> Circuit:
    spec = spec or ErrorSpec()
    if spec.kind not in (ErrorKind.NONE, allowed):
        raise ValidationError(f"this pipeline takes errors of kind None or {allowed.value}, got {spec.kind.value}")
    if conditionals not in ("coherent", "measured"):
        raise ValidationError(f"conditionals must be 'coherent' or 'measured', got {conditionals!r}")
    _check_layout(layout)
    msg, bf, bs, anc = layout.message, layout.bell_first, layout.bell_second, layout.ancilla
    n_cbits = 3 + (6 if conditionals == "measured" else 0)
    amps = message_state(params, message_mode)
    c = Circuit(layout.num_qubits, n_cbits, metadata={
        "pipeline": "phaseflip" if phase_basis else "bitflip",
        "code": "repetition3",
        "layout": layout.to_json(),
        "message": [[float(a.real), float(a.imag)] for a in amps],
        "message_mode": MessageMode(message_mode).value,
        "output": list(bs),
        "decode_basis": "ZZZ",
        "conditionals": conditionals,
        "syndrome_ancillas": list(anc),
    })
    # A: message and encoding
    c.compose(prepare_message(params, message_mode), [msg[0]])
    c.compose(encode_repetition3(), list(msg))
    if phase_basis:
        for q in msg:
            c.h(q)
    c.marker(CHANNEL, msg)
    if phase_basis:
        for q in msg:
            c.h(q)
    # B: logical Bell pair
    c.compose(prepare_logical_bell_3(), list(bf) + list(bs))
    # C: logical CNOT, D: syndrome, E: correction
    c.compose(logical_cnot(layout))
    c.compose(syndrome_extract(layout))
    c.compose(coherent_correct(layout))
    # F: conditionals
    if conditionals == "coherent":
        c.compose(teleport_conditionals_3(layout))
    else:
        frag, rules = measured_conditionals_3(layout, first_cbit=3)
        c.compose(frag)
        c.metadata["frame_rules"] = rules
    # G: read out the second Bell half
    c.marker(DECODE, bs)
    if measure:
        for i, q in enumerate(bs):
            c.measure(q, i)
    if spec.kind is not ErrorKind.NONE:
        c = inject(c, spec)
    return c


def build_bitflip_tec_circuit(spec: ErrorSpec | None = None, *, params: MessageParams = DEFAULT_PARAMS,
                              message_mode: MessageMode | str = MessageMode.ROTATION,
                              conditionals: str = "coherent", layout: BlockLayout = BITFLIP_LAYOUT,
                              measure: bool = True) -> Circuit:
    """Full bit-flip pipeline with an optional X error at the channel marker."""
    return _build(spec, ErrorKind.BIT_FLIP, False, params, message_mode, conditionals, layout, measure)


def build_phaseflip_tec_circuit(spec: ErrorSpec | None = None, *, params: MessageParams = DEFAULT_PARAMS,
                                message_mode: MessageMode | str = MessageMode.ROTATION,
                                conditionals: str = "coherent", layout: BlockLayout = BITFLIP_LAYOUT,
                                measure: bool = True) -> Circuit:
    """Bit-flip pipeline with Hadamards on the message block around the channel.

    A Z error inside the sandwich reaches the rest of the circuit as an X.
    """
    return _build(spec, ErrorKind.PHASE_FLIP, True, params, message_mode, conditionals, layout, measure)
