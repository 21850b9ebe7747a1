"""Device coupling maps, connectivity checks and greedy SWAP routing.

Edges are directed ``(control, target)`` pairs.  A CNOT against an edge's
direction is realized by conjugating both qubits with Hadamards.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import qsim
from .circuit import Circuit, GateOp, simulate, unitary_of
from .errors import ParseError, RoutingError, ValidationError

MAP_VERSION = 1

# Directed CNOT connections of the 14-qubit Melbourne processor, in caption order.
MELBOURNE_EDGES = (
    (1, 0), (1, 2), (2, 3), (4, 10), (5, 9), (5, 6), (5, 4), (6, 8), (7, 8),
    (9, 8), (9, 10), (11, 12), (11, 10), (11, 3), (12, 2), (13, 12), (13, 1),
)

# Qubit frequencies in GHz, informational only.
MELBOURNE_FREQ_GHZ = (
    5.1000, 5.2384, 5.0328, 4.8961, 5.0262, 5.0670, 4.9237,
    4.9744, 4.7381, 4.9633, 4.9450, 5.0046, 4.7598, 4.9685,
)


class DirectionPolicy(str, Enum):
    STRICT = "Strict"
    ALLOW_REVERSED = "AllowReversed"


@dataclass(frozen=True)
class CouplingMap:
    num_qubits: int
    edges: frozenset[tuple[int, int]]
    annotations: dict[int, dict] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        edges = frozenset((int(a), int(b)) for a, b in self.edges)
        for a, b in edges:
            if a == b:
                raise ValidationError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise ValidationError(f"edge ({a},{b}) out of range for {self.num_qubits} qubits")
        object.__setattr__(self, "edges", edges)
        adj: dict[int, list[int]] = {q: [] for q in range(self.num_qubits)}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        object.__setattr__(self, "_adj", {q: sorted(set(v)) for q, v in adj.items()})

    def has_edge(self, control: int, target: int) -> bool:
        return (control, target) in self.edges

    def adjacent(self, a: int, b: int) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def neighbors(self, q: int) -> list[int]:
        return self._adj[q]

    def shortest_path(self, src: int, dst: int) -> list[int]:
        """BFS path visiting neighbours in ascending order, so ties go to lower indices."""
        prev = {src: None}
        todo = deque([src])
        while todo:
            q = todo.popleft()
            if q == dst:
                break
            for n in self._adj[q]:
                if n not in prev:
                    prev[n] = q
                    todo.append(n)
        if dst not in prev:
            raise RoutingError(f"qubits {src} and {dst} are in different components of the coupling map")
        path = [dst]
        while path[-1] != src:
            path.append(prev[path[-1]])
        return path[::-1]

    def bfs_order(self, start: int = 0) -> list[int]:
        seen = [start]
        todo = deque([start])
        while todo:
            for n in self._adj[todo.popleft()]:
                if n not in seen:
                    seen.append(n)
                    todo.append(n)
        return seen

    def is_connected(self) -> bool:
        return len(self.bfs_order(0)) == self.num_qubits

    def induced(self, qubits: Sequence[int]) -> "CouplingMap":
        """Sub-map on ``qubits``, relabelled so ``qubits[i]`` becomes ``i``."""
        pos = {q: i for i, q in enumerate(qubits)}
        edges = [(pos[a], pos[b]) for a, b in self.edges if a in pos and b in pos]
        ann = {pos[q]: v for q, v in self.annotations.items() if q in pos}
        return CouplingMap(len(qubits), edges, ann)

    def to_json(self) -> dict:
        return {
            "version": MAP_VERSION,
            "num_qubits": self.num_qubits,
            "edges": [list(e) for e in sorted(self.edges)],
            "annotations": {str(q): dict(v) for q, v in sorted(self.annotations.items())},
        }

    @classmethod
    def from_json(cls, doc) -> "CouplingMap":
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError as e:
                raise ParseError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
        if not isinstance(doc, dict):
            raise ParseError("coupling map must be a JSON object")
        unknown = set(doc) - {"version", "num_qubits", "edges", "annotations"}
        if unknown:
            raise ParseError(f"unknown coupling-map field(s): {sorted(unknown)}")
        if doc.get("version") != MAP_VERSION:
            raise ParseError(f"unsupported coupling-map version {doc.get('version')!r}")
        try:
            edges = [tuple(e) for e in doc["edges"]]
            if any(len(e) != 2 for e in edges):
                raise ParseError("each edge must be a [control, target] pair")
            ann = {int(k): dict(v) for k, v in doc.get("annotations", {}).items()}
            return cls(int(doc["num_qubits"]), edges, ann)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad coupling map: {e}") from None


def melbourne_map() -> CouplingMap:
    ann = {q: {"freq_ghz": f} for q, f in enumerate(MELBOURNE_FREQ_GHZ)}
    return CouplingMap(14, MELBOURNE_EDGES, ann)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    index: int
    op: GateOp
    reason: str


def validate(circuit: Circuit, cmap: CouplingMap,
             policy: DirectionPolicy | str = DirectionPolicy.STRICT) -> list[Violation]:
    """Ops that the device cannot run as written.  An empty list means valid."""
    policy = DirectionPolicy(policy)
    if circuit.num_qubits > cmap.num_qubits:
        raise ValidationError(f"circuit has {circuit.num_qubits} qubits, map only {cmap.num_qubits}")
    out = []
    for i, op in enumerate(circuit.ops):
        if op.kind == "Marker" or len(op.qubits) == 1:
            continue
        if len(op.qubits) > 2:
            out.append(Violation(i, op, f"{op.kind} requires decomposition"))
            continue
        a, b = op.qubits
        if op.kind == "CNOT" and policy is DirectionPolicy.STRICT:
            if not cmap.has_edge(a, b):
                reason = "reversed CNOT" if cmap.has_edge(b, a) else "qubits not coupled"
                out.append(Violation(i, op, f"{reason}: CNOT({a},{b})"))
        elif not cmap.adjacent(a, b):
            out.append(Violation(i, op, f"qubits not coupled: {op.kind}({a},{b})"))
    return out


# ---------------------------------------------------------------------------
# Toffoli decomposition


def toffoli_network(c1: int, c2: int, t: int) -> list[GateOp]:
    """Standard 15-gate Clifford+T network (6 CNOTs)."""
    seq = [
        ("H", t), ("CNOT", c2, t), ("Tdg", t), ("CNOT", c1, t), ("T", t), ("CNOT", c2, t),
        ("Tdg", t), ("CNOT", c1, t), ("T", c2), ("T", t), ("H", t), ("CNOT", c1, c2),
        ("T", c1), ("Tdg", c2), ("CNOT", c1, c2),
    ]
    return [GateOp(kind, tuple(qs)) for kind, *qs in seq]


def decompose_toffoli(circuit: Circuit) -> Circuit:
    ops: list[GateOp] = []
    for op in circuit.ops:
        ops.extend(toffoli_network(*op.qubits) if op.kind == "Toffoli" else [op])
    return circuit.copy(ops)


# ---------------------------------------------------------------------------
# routing


@dataclass
class RoutedCircuit:
    """``initial_layout[l]`` / ``final_layout[l]``: physical position of logical qubit ``l``."""

    circuit: Circuit
    initial_layout: tuple[int, ...]
    final_layout: tuple[int, ...]
    swaps_inserted: int


def route(circuit: Circuit, cmap: CouplingMap, *, decompose: bool = True,
          initial_layout: Sequence[int] | None = None) -> RoutedCircuit:
    """Greedy SWAP routing.

    Before each two-qubit gate whose operands are not coupled, the first
    operand (the control, for CNOT) is swapped along a BFS shortest path
    until it sits next to the second.  CNOTs against an edge's direction get
    Hadamard conjugation.  Toffolis are decomposed first unless
    ``decompose=False``, in which case they are rejected.
    """
    n = circuit.num_qubits
    if n > cmap.num_qubits:
        raise RoutingError(f"circuit has {n} qubits, map only {cmap.num_qubits}")
    if circuit.count("Toffoli"):
        if not decompose:
            raise RoutingError("circuit contains Toffoli gates; decompose them first")
        circuit = decompose_toffoli(circuit)
    layout = list(range(n)) if initial_layout is None else [int(p) for p in initial_layout]
    if len(layout) != n or len(set(layout)) != n or not all(0 <= p < cmap.num_qubits for p in layout):
        raise RoutingError(f"initial layout {layout} is not an injective map into the device")
    start = tuple(layout)
    occupant = {p: l for l, p in enumerate(layout)}
    ops: list[GateOp] = []
    swaps = 0

    def swap(pa: int, pb: int) -> None:
        la, lb = occupant.get(pa), occupant.get(pb)
        ops.append(GateOp("SWAP", (pa, pb)))
        for p, l in ((pb, la), (pa, lb)):
            if l is None:
                occupant.pop(p, None)
            else:
                occupant[p] = l
                layout[l] = p

    for op in circuit.ops:
        if op.kind == "Marker" or len(op.qubits) == 1:
            ops.append(op.remap(layout))
            continue
        a, b = op.qubits
        pa, pb = layout[a], layout[b]
        if not cmap.adjacent(pa, pb):
            path = cmap.shortest_path(pa, pb)
            for i in range(len(path) - 2):
                swap(path[i], path[i + 1])
                swaps += 1
            pa = layout[a]
        if op.kind == "CNOT" and not cmap.has_edge(pa, pb):
            ops += [GateOp("H", (pa,)), GateOp("H", (pb,)), GateOp("CNOT", (pb, pa)),
                    GateOp("H", (pa,)), GateOp("H", (pb,))]
        else:
            ops.append(GateOp(op.kind, (pa, pb), op.theta, op.cbit, op.label))
    routed = Circuit(cmap.num_qubits, circuit.num_cbits, ops, circuit.metadata)
    routed.metadata["routing"] = {"initial_layout": list(start), "final_layout": list(layout), "swaps": swaps}
    return RoutedCircuit(routed, start, tuple(layout), swaps)


def restore_layout(routed: RoutedCircuit) -> Circuit:
    """Routed circuit followed by SWAPs that return every logical qubit to its initial position.

    The appended SWAPs ignore connectivity; this is for checking only.
    """
    c = routed.circuit.copy()
    where = {l: p for l, p in enumerate(routed.final_layout)}
    occupant = {p: l for l, p in where.items()}
    for l, home in enumerate(routed.initial_layout):
        cur = where[l]
        if cur == home:
            continue
        c.swap(cur, home)
        other = occupant.get(home)
        occupant[cur], occupant[home] = other, l
        where[l] = home
        if other is not None:
            where[other] = cur
    return c


def _embedded(circuit: Circuit, routed: RoutedCircuit) -> Circuit:
    """Original circuit placed on the device at the initial layout."""
    out = Circuit(routed.circuit.num_qubits, circuit.num_cbits, metadata=circuit.metadata)
    out.compose(circuit.without({"Measure", "Reset"}), routed.initial_layout)
    return out


def unitary_equivalent(circuit: Circuit, routed: RoutedCircuit, atol: float = 1e-8) -> bool:
    """Compare full unitaries (device width at most 10 qubits)."""
    u0 = unitary_of(_embedded(circuit, routed))
    u1 = unitary_of(restore_layout(routed).without({"Measure", "Reset"}))
    return bool(np.allclose(u0, u1, atol=atol, rtol=0))


def statevector_equivalent(circuit: Circuit, routed: RoutedCircuit, seed: int = 0,
                           atol: float = 1e-8) -> bool:
    """Compare final states from a random input on the circuit's qubits (others start in |0>)."""
    n = routed.circuit.num_qubits
    rng = np.random.default_rng(seed)
    k = circuit.num_qubits
    local = rng.normal(size=1 << k) + 1j * rng.normal(size=1 << k)
    local /= np.linalg.norm(local)
    # place logical qubit l on physical initial_layout[l]
    full = np.zeros(1 << n, dtype=qsim.DTYPE)
    for i, amp in enumerate(local):
        j = 0
        for l, p in enumerate(routed.initial_layout):
            j |= ((i >> l) & 1) << p
        full[j] = amp
    a = simulate(_embedded(circuit, routed), 0, initial_state=full).final_state
    b = simulate(restore_layout(routed).without({"Measure", "Reset"}), 0, initial_state=full).final_state
    return bool(np.allclose(a, b, atol=atol, rtol=0))


def truncate(circuit: Circuit, num_qubits: int) -> Circuit:
    """Unitary ops acting only on qubits below ``num_qubits``."""
    ops = [op for op in circuit.ops
           if op.is_unitary and all(q < num_qubits for q in op.qubits)]
    return Circuit(num_qubits, 0, ops)


def random_connected_map(num_qubits: int, rng: np.random.Generator, extra_edges: int = 2) -> CouplingMap:
    """Random spanning tree plus a few extra edges, random directions."""
    order = rng.permutation(num_qubits)
    edges = set()
    for i in range(1, num_qubits):
        a, b = int(order[i]), int(order[rng.integers(i)])
        edges.add((a, b) if rng.random() < 0.5 else (b, a))
    for _ in range(extra_edges):
        a, b = (int(x) for x in rng.choice(num_qubits, 2, replace=False))
        if (b, a) not in edges:
            edges.add((a, b))
    return CouplingMap(num_qubits, edges)


def random_circuit(num_qubits: int, depth: int, rng: np.random.Generator) -> Circuit:
    one = ("H", "X", "S", "T", "Sdg", "Y", "Z")
    c = Circuit(num_qubits)
    for _ in range(depth):
        r = rng.random()
        if r < 0.4 or num_qubits < 2:
            c.add(str(rng.choice(one)), int(rng.integers(num_qubits)))
        elif r < 0.85:
            a, b = (int(x) for x in rng.choice(num_qubits, 2, replace=False))
            c.add(str(rng.choice(("CNOT", "CNOT", "CZ", "SWAP"))), a, b)
        elif num_qubits >= 3:
            a, b, t = (int(x) for x in rng.choice(num_qubits, 3, replace=False))
            c.ccx(a, b, t)
        else:
            c.ry(float(rng.uniform(0, 2 * np.pi)), int(rng.integers(num_qubits)))
    return c


def route_all(circuits: Iterable[Circuit], cmap: CouplingMap) -> list[RoutedCircuit]:
    return [route(c, cmap) for c in circuits]
