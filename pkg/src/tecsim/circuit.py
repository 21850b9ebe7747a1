"""Circuit representation, simulation driver and JSON (de)serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from . import qsim
from .errors import (
    CapacityError,
    ParseError,
    QubitIndexError,
    UnsupportedError,
    ValidationError,
)
from .qsim import DTYPE, RandomSource

FORMAT_VERSION = 1

_T = np.exp(1j * np.pi / 4)
FIXED_GATES: dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=DTYPE) / np.sqrt(2),
    "X": qsim.PAULI["X"],
    "Y": qsim.PAULI["Y"],
    "Z": qsim.PAULI["Z"],
    "S": np.diag([1, 1j]).astype(DTYPE),
    "Sdg": np.diag([1, -1j]).astype(DTYPE),
    "T": np.diag([1, _T]).astype(DTYPE),
    "Tdg": np.diag([1, np.conj(_T)]).astype(DTYPE),
    "CNOT": np.eye(4, dtype=DTYPE)[[0, 1, 3, 2]],
    "CZ": np.diag([1, 1, 1, -1]).astype(DTYPE),
    "SWAP": np.eye(4, dtype=DTYPE)[[0, 2, 1, 3]],
    "Toffoli": np.eye(8, dtype=DTYPE)[[0, 1, 2, 3, 4, 5, 7, 6]],
}

ARITY = {k: int(np.log2(m.shape[0])) for k, m in FIXED_GATES.items()}
ARITY.update({"Ry": 1, "Measure": 1, "Reset": 1})
# Marker takes any positive number of qubits.
KINDS = frozenset(ARITY) | {"Marker"}
UNITARY_KINDS = frozenset(FIXED_GATES) | {"Ry"}


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=DTYPE)


@dataclass(frozen=True)
class GateOp:
    """One instruction.

    ``theta`` is set only for ``Ry``; ``cbit`` only for ``Measure``; ``label``
    only for ``Marker``.  For controlled gates the controls come first in
    ``qubits``.
    """

    kind: str
    qubits: tuple[int, ...]
    theta: float | None = None
    cbit: int | None = None
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        if self.kind == "Marker":
            if not self.qubits:
                raise ValidationError("Marker needs at least one qubit")
            if not self.label:
                raise ValidationError("Marker needs a label")
        elif len(self.qubits) != ARITY[self.kind]:
            raise ValidationError(
                f"{self.kind} acts on {ARITY[self.kind]} qubit(s), got {len(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise QubitIndexError(f"{self.kind} has repeated qubits {self.qubits}")
        if (self.kind == "Ry") != (self.theta is not None):
            raise ValidationError("theta is required for Ry and forbidden otherwise")
        if self.theta is not None and not math.isfinite(self.theta):
            raise ValidationError(f"theta must be finite, got {self.theta}")
        if (self.kind == "Measure") != (self.cbit is not None):
            raise ValidationError("cbit is required for Measure and forbidden otherwise")
        if self.kind != "Marker" and self.label is not None:
            raise ValidationError("label is only valid on Marker")

    @property
    def is_unitary(self) -> bool:
        return self.kind in UNITARY_KINDS

    def matrix(self) -> np.ndarray:
        if self.kind == "Ry":
            return ry_matrix(self.theta)
        try:
            return FIXED_GATES[self.kind]
        except KeyError:
            raise UnsupportedError(f"{self.kind} has no matrix") from None

    def remap(self, mapping: Sequence[int] | dict[int, int]) -> "GateOp":
        return GateOp(self.kind, tuple(mapping[q] for q in self.qubits), self.theta, self.cbit, self.label)


class Circuit:
    """Ordered list of :class:`GateOp` over ``num_qubits`` qubits and ``num_cbits`` bits.

    The builder methods validate on append and return ``self`` so that calls
    chain.  Each classical bit may be written by at most one ``Measure`` and
    marker labels are unique.
    """

    def __init__(self, num_qubits: int, num_cbits: int = 0, ops: Iterable[GateOp] = (),
                 metadata: dict[str, Any] | None = None):
        if num_qubits < 1:
            raise ValidationError(f"num_qubits must be >= 1, got {num_qubits}")
        if num_cbits < 0:
            raise ValidationError(f"num_cbits must be >= 0, got {num_cbits}")
        self.num_qubits = int(num_qubits)
        self.num_cbits = int(num_cbits)
        self.ops: list[GateOp] = []
        self.metadata: dict[str, Any] = dict(metadata or {})
        self._labels: set[str] = set()
        self._written: set[int] = set()
        for op in ops:
            self.append(op)

    # -- construction ----------------------------------------------------

    def append(self, op: GateOp) -> "Circuit":
        for q in op.qubits:
            if not 0 <= q < self.num_qubits:
                raise QubitIndexError(f"qubit {q} out of range for {self.num_qubits}-qubit circuit")
        if op.kind == "Measure":
            if not 0 <= op.cbit < self.num_cbits:
                raise QubitIndexError(f"cbit {op.cbit} out of range for {self.num_cbits} cbits")
            if op.cbit in self._written:
                raise ValidationError(f"cbit {op.cbit} is written by more than one Measure")
            self._written.add(op.cbit)
        if op.kind == "Marker":
            if op.label in self._labels:
                raise ValidationError(f"duplicate marker label {op.label!r}")
            self._labels.add(op.label)
        self.ops.append(op)
        return self

    def add(self, kind: str, *qubits: int, **kw) -> "Circuit":
        return self.append(GateOp(kind, qubits, **kw))

    def h(self, q): return self.add("H", q)
    def x(self, q): return self.add("X", q)
    def y(self, q): return self.add("Y", q)
    def z(self, q): return self.add("Z", q)
    def s(self, q): return self.add("S", q)
    def sdg(self, q): return self.add("Sdg", q)
    def t(self, q): return self.add("T", q)
    def tdg(self, q): return self.add("Tdg", q)
    def ry(self, theta, q): return self.add("Ry", q, theta=float(theta))
    def cx(self, c, t): return self.add("CNOT", c, t)
    def cz(self, a, b): return self.add("CZ", a, b)
    def swap(self, a, b): return self.add("SWAP", a, b)
    def ccx(self, c1, c2, t): return self.add("Toffoli", c1, c2, t)
    def measure(self, q, cbit): return self.add("Measure", q, cbit=cbit)
    def reset(self, q): return self.add("Reset", q)

    def marker(self, label: str, qubits: Sequence[int]) -> "Circuit":
        return self.append(GateOp("Marker", tuple(qubits), label=label))

    def compose(self, fragment: "Circuit", qubits: Sequence[int] | None = None,
                cbits: Sequence[int] | None = None) -> "Circuit":
        """Append ``fragment`` with its qubit ``i`` placed on ``qubits[i]``."""
        qubits = list(range(fragment.num_qubits)) if qubits is None else list(qubits)
        cbits = list(range(fragment.num_cbits)) if cbits is None else list(cbits)
        if len(qubits) != fragment.num_qubits:
            raise ValidationError(
                f"fragment has {fragment.num_qubits} qubits but {len(qubits)} positions given"
            )
        for op in fragment.ops:
            new = op.remap(qubits)
            if op.cbit is not None:
                new = GateOp(new.kind, new.qubits, new.theta, cbits[op.cbit], new.label)
            self.append(new)
        return self

    # -- queries ----------------------------------------------------------

    def copy(self, ops: Iterable[GateOp] | None = None) -> "Circuit":
        return Circuit(self.num_qubits, self.num_cbits, self.ops if ops is None else ops,
                       json.loads(json.dumps(self.metadata)))

    def marker_index(self, label: str) -> int:
        for i, op in enumerate(self.ops):
            if op.kind == "Marker" and op.label == label:
                return i
        raise ValidationError(f"no marker labelled {label!r}")

    def get_marker(self, label: str) -> GateOp:
        return self.ops[self.marker_index(label)]

    @property
    def labels(self) -> list[str]:
        return [op.label for op in self.ops if op.kind == "Marker"]

    def prefix(self, label: str) -> "Circuit":
        """Copy holding only the ops before marker ``label``."""
        return self.copy(self.ops[: self.marker_index(label)])

    def without(self, kinds: Iterable[str]) -> "Circuit":
        kinds = set(kinds)
        return self.copy(op for op in self.ops if op.kind not in kinds)

    def without_markers(self) -> "Circuit":
        return self.without({"Marker"})

    def count(self, kind: str) -> int:
        return sum(op.kind == kind for op in self.ops)

    @property
    def has_nonunitary(self) -> bool:
        return any(op.kind in ("Measure", "Reset") for op in self.ops)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits, self.num_cbits, self.ops, self.metadata) == (
            other.num_qubits, other.num_cbits, other.ops, other.metadata)

    def __repr__(self):
        return f"Circuit(num_qubits={self.num_qubits}, num_cbits={self.num_cbits}, ops={len(self.ops)})"


# ---------------------------------------------------------------------------
# simulation


@dataclass
class Branch:
    """One measurement record of an exact (shots=0) run."""

    probability: float
    state: np.ndarray
    cbits: tuple[int, ...]


@dataclass
class SimResult:
    """Outcome of :func:`simulate`.

    ``final_state`` is set when the run left no measurement randomness
    (a single branch).  ``branches`` always holds the exact mixture in
    shots=0 mode; ``counts``/``cbit_values`` are filled in sampling mode.
    Bitstring character ``j`` is classical bit ``j``.
    """

    num_cbits: int
    shots: int
    final_state: np.ndarray | None = None
    branches: list[Branch] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    cbit_values: np.ndarray | None = None

    @property
    def cbit_probabilities(self) -> dict[str, float]:
        probs: dict[str, float] = {}
        for b in self.branches:
            key = "".join(map(str, b.cbits))
            probs[key] = probs.get(key, 0.0) + b.probability
        return dict(sorted(probs.items()))

    def reduced_density(self, keep: Sequence[int]) -> np.ndarray:
        """Exact mixed reduced state of ``keep`` over all branches."""
        if not self.branches:
            raise UnsupportedError("reduced_density needs an exact (shots=0) result")
        return sum(b.probability * qsim.reduced_density(b.state, keep) for b in self.branches)


def _apply_op(state: np.ndarray, n: int, op: GateOp) -> None:
    qsim.apply_inplace(state, n, op.matrix(), op.qubits)


def _flip_to_zero(state: np.ndarray, n: int, qubit: int) -> None:
    qsim.apply_inplace(state, n, qsim.PAULI["X"], [qubit])


def _exact(circuit: Circuit, state: np.ndarray) -> list[Branch]:
    n = circuit.num_qubits
    branches = [Branch(1.0, state, (0,) * circuit.num_cbits)]
    for op in circuit.ops:
        if op.kind == "Marker":
            continue
        if op.is_unitary:
            for b in branches:
                _apply_op(b.state, n, op)
            continue
        q = op.qubits[0]
        nxt = []
        for b in branches:
            for bit in (0, 1):
                p, post = qsim.project(b.state, q, bit)
                if p < qsim.ZERO_BRANCH:
                    continue
                cbits = b.cbits
                if op.kind == "Measure":
                    cbits = cbits[: op.cbit] + (bit,) + cbits[op.cbit + 1:]
                elif bit:
                    _flip_to_zero(post, n, q)
                nxt.append(Branch(b.probability * p, post, cbits))
        branches = nxt
    return branches


def _terminal_split(circuit: Circuit) -> tuple[list[GateOp], list[GateOp]] | None:
    """Split into (body, measurements) when every Measure is terminal and there is no Reset."""
    if any(op.kind == "Reset" for op in circuit.ops):
        return None
    measured: set[int] = set()
    body, tail = [], []
    for op in circuit.ops:
        if op.kind == "Measure":
            measured.add(op.qubits[0])
            tail.append(op)
        elif op.kind == "Marker":
            continue
        elif measured.intersection(op.qubits):
            return None
        else:
            body.append(op)
    if len({op.qubits[0] for op in tail}) != len(tail):
        return None
    return body, tail


def _flip_readout(values: np.ndarray, p: float, rng: RandomSource) -> np.ndarray:
    if p <= 0:
        return values
    flips = rng.spawn(1 << 32).generator.random(values.shape) < p
    return values ^ flips.astype(values.dtype)


def simulate(circuit: Circuit, shots: int = 0, seed: int = 0, *,
             initial_state: np.ndarray | None = None, readout_error: float = 0.0) -> SimResult:
    """Run ``circuit``.

    ``shots=0`` is exact mode: measurements and resets are expanded into
    weighted branches.  ``shots>0`` samples.  When every measurement is
    terminal the final state is computed once and sampled; otherwise each
    shot is an independent trajectory drawing from substream ``(seed, shot)``.
    Markers act as identity.
    """
    n = circuit.num_qubits
    if n > qsim.MAX_QUBITS:
        raise CapacityError(f"circuit has {n} qubits; the simulator supports at most {qsim.MAX_QUBITS}")
    if shots < 0:
        raise ValidationError(f"shots must be >= 0, got {shots}")
    if not 0 <= readout_error <= 1:
        raise ValidationError(f"readout_error must be in [0, 1], got {readout_error}")
    state = qsim.zero_state(n) if initial_state is None else np.array(initial_state, dtype=DTYPE, copy=True)
    if state.shape != (1 << n,):
        raise ValidationError(f"initial state has shape {state.shape}, expected {(1 << n,)}")
    rng = RandomSource(seed)

    if shots == 0:
        branches = _exact(circuit, state)
        final = branches[0].state if len(branches) == 1 and not circuit.has_nonunitary else None
        return SimResult(circuit.num_cbits, 0, final_state=final, branches=branches)

    split = _terminal_split(circuit)
    if split is not None:
        body, tail = split
        for op in body:
            _apply_op(state, n, op)
        values = np.zeros((shots, circuit.num_cbits), dtype=np.uint8)
        if tail:
            qubits = [op.qubits[0] for op in tail]
            outcomes = qsim.sample_outcomes(state, qubits, shots, rng)
            for j, op in enumerate(tail):
                values[:, op.cbit] = (outcomes >> j) & 1
        final = state if not tail else None
    else:
        values = np.zeros((shots, circuit.num_cbits), dtype=np.uint8)
        for shot in range(shots):
            traj = rng.spawn(shot)
            psi = state.copy()
            for op in circuit.ops:
                if op.kind == "Marker":
                    continue
                if op.is_unitary:
                    _apply_op(psi, n, op)
                    continue
                bit, psi = qsim.measure_z(psi, op.qubits[0], traj)
                if op.kind == "Measure":
                    values[shot, op.cbit] = bit
                elif bit:
                    _flip_to_zero(psi, n, op.qubits[0])
        final = None
    values = _flip_readout(values, readout_error, rng)
    return SimResult(circuit.num_cbits, shots, final_state=final,
                     counts=counts_from_values(values), cbit_values=values)


def exact_distribution(circuit: Circuit, initial_state: np.ndarray | None = None) -> dict[tuple[int, ...], float]:
    """Exact joint distribution of the classical bits.

    Same numbers as the branches of ``simulate(circuit, 0)``, but measurements
    that no later op touches are read from the marginals of the remaining
    branches instead of splitting them, which keeps the branch count small.
    """
    touched: set[int] = set()
    terminal: list[int] = []
    for i in range(len(circuit.ops) - 1, -1, -1):
        op = circuit.ops[i]
        if op.kind == "Marker":
            continue
        if op.kind == "Measure" and op.qubits[0] not in touched:
            terminal.append(i)
        touched.update(op.qubits)
    skip = set(terminal)
    body = circuit.copy([op for i, op in enumerate(circuit.ops) if i not in skip])
    tail = [circuit.ops[i] for i in reversed(terminal)]
    qubits = [op.qubits[0] for op in tail]
    out: dict[tuple[int, ...], float] = {}
    for b in simulate(body, 0, initial_state=initial_state).branches:
        probs = qsim.marginal_probabilities(b.state, qubits) if tail else np.ones(1)
        for idx in np.flatnonzero(probs > qsim.ZERO_BRANCH):
            cbits = list(b.cbits)
            for j, op in enumerate(tail):
                cbits[op.cbit] = (int(idx) >> j) & 1
            key = tuple(cbits)
            out[key] = out.get(key, 0.0) + b.probability * float(probs[idx])
    return dict(sorted(out.items()))


def counts_from_values(values: np.ndarray) -> dict[str, int]:
    counts: dict[str, int] = {}
    for row in values:
        key = "".join(map(str, row))
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))


def statevector(circuit: Circuit, initial_state: np.ndarray | None = None) -> np.ndarray:
    """Exact final state of a measurement-free circuit."""
    if circuit.has_nonunitary:
        raise UnsupportedError("statevector() needs a circuit without Measure/Reset")
    return simulate(circuit, 0, initial_state=initial_state).final_state


def unitary_of(circuit: Circuit) -> np.ndarray:
    """Full unitary of a measurement-free circuit (at most 10 qubits)."""
    if circuit.has_nonunitary:
        raise UnsupportedError("unitary_of() is undefined for circuits with Measure/Reset")
    n = circuit.num_qubits
    if n > 10:
        raise CapacityError(f"unitary_of supports at most 10 qubits, got {n}")
    u = np.eye(1 << n, dtype=DTYPE)
    for op in circuit.ops:
        if op.kind != "Marker":
            _apply_op(u, n, op)
    return u


# ---------------------------------------------------------------------------
# serialization

_OP_FIELDS = {"kind", "qubits", "theta", "cbit", "label"}
_DOC_FIELDS = {"version", "num_qubits", "num_cbits", "ops", "metadata"}


def _op_to_json(op: GateOp) -> dict[str, Any]:
    kind = op.kind
    d: dict[str, Any] = {"kind": kind}
    if kind == "Ry":
        d["theta"] = op.theta
    if kind == "Marker":
        d["label"] = op.label
    d["qubits"] = list(op.qubits)
    if kind == "Measure":
        d["cbit"] = op.cbit
    return d


def to_json(circuit: Circuit) -> dict[str, Any]:
    return {
        "version": FORMAT_VERSION,
        "num_qubits": circuit.num_qubits,
        "num_cbits": circuit.num_cbits,
        "ops": [_op_to_json(op) for op in circuit.ops],
        "metadata": circuit.metadata,
    }


def serialize(circuit: Circuit) -> str:
    return json.dumps(to_json(circuit), ensure_ascii=False)


def _need_int(obj: dict, key: str, where: str) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ParseError(f"{where}: field {key!r} must be an integer, got {v!r}")
    return v


def from_json(doc: Any) -> Circuit:
    if not isinstance(doc, dict):
        raise ParseError("circuit document must be a JSON object")
    extra = set(doc) - _DOC_FIELDS
    if extra:
        raise ParseError(f"unknown top-level field(s): {sorted(extra)}")
    if "version" not in doc:
        raise ParseError("missing field 'version'")
    if doc["version"] != FORMAT_VERSION:
        raise ParseError(f"unsupported version {doc['version']!r}; expected {FORMAT_VERSION}")
    for key in ("num_qubits", "num_cbits", "ops"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    nq = _need_int(doc, "num_qubits", "document")
    nc = _need_int(doc, "num_cbits", "document")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ParseError("field 'metadata' must be an object")
    if not isinstance(doc["ops"], list):
        raise ParseError("field 'ops' must be a list")
    try:
        circuit = Circuit(nq, nc, metadata=metadata)
    except ValidationError as e:
        raise ParseError(f"document: {e}") from None
    for i, raw in enumerate(doc["ops"]):
        where = f"ops[{i}]"
        if not isinstance(raw, dict):
            raise ParseError(f"{where}: must be an object")
        extra = set(raw) - _OP_FIELDS
        if extra:
            raise ParseError(f"{where}: unknown field(s) {sorted(extra)}")
        kind = raw.get("kind")
        if kind not in KINDS:
            raise ParseError(f"{where}: field 'kind' has unknown value {kind!r}")
        qubits = raw.get("qubits")
        if not isinstance(qubits, list) or not all(isinstance(q, int) and not isinstance(q, bool) for q in qubits):
            raise ParseError(f"{where}: field 'qubits' must be a list of integers")
        theta = raw.get("theta")
        if theta is not None and (not isinstance(theta, (int, float)) or isinstance(theta, bool)):
            raise ParseError(f"{where}: field 'theta' must be a number")
        cbit = raw.get("cbit")
        if cbit is not None:
            cbit = _need_int(raw, "cbit", where)
        label = raw.get("label")
        if label is not None and not isinstance(label, str):
            raise ParseError(f"{where}: field 'label' must be a string")
        try:
            circuit.append(GateOp(kind, tuple(qubits), None if theta is None else float(theta), cbit, label))
        except ValidationError as e:
            raise ParseError(f"{where}: {e}") from None
    return circuit


def deserialize(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return from_json(doc)
