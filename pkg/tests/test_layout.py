import json

import numpy as np
import pytest

from tecsim.circuit import Circuit, unitary_of
from tecsim.errors import ParseError, RoutingError, ValidationError
from tecsim.layout import (
    MELBOURNE_EDGES,
    CouplingMap,
    DirectionPolicy,
    decompose_toffoli,
    melbourne_map,
    random_circuit,
    random_connected_map,
    restore_layout,
    route,
    statevector_equivalent,
    truncate,
    unitary_equivalent,
    validate,
)
from tecsim.tec import build_bitflip_tec_circuit, build_erasure_tec_circuit

# transcribed from the figure caption, control -> targets
CAPTION = {1: [0, 2], 2: [3], 4: [10], 5: [9, 6, 4], 6: [8], 7: [8], 9: [8, 10],
           11: [12, 10, 3], 12: [2], 13: [12, 1]}


def test_melbourne_literal():
    cmap = melbourne_map()
    assert cmap.num_qubits == 14
    literal = {(c, t) for c, ts in CAPTION.items() for t in ts}
    assert set(cmap.edges) == set(MELBOURNE_EDGES) == literal
    assert len(cmap.edges) == 17
    assert cmap.has_edge(5, 9) and not cmap.has_edge(9, 5)
    assert not cmap.has_edge(0, 1) and cmap.has_edge(1, 0)
    assert cmap.is_connected()


def test_validate_policies():
    cmap = melbourne_map()
    c = Circuit(14).cx(1, 0).cx(0, 1).cz(0, 1).cx(0, 2)
    strict = validate(c, cmap, DirectionPolicy.STRICT)
    assert [v.index for v in strict] == [1, 3]
    assert "reversed" in strict[0].reason and "not coupled" in strict[1].reason
    assert [v.index for v in validate(c, cmap, "AllowReversed")] == [3]
    tof = validate(Circuit(14).ccx(0, 1, 2), cmap)
    assert tof and "requires decomposition" in tof[0].reason
    with pytest.raises(ValidationError):
        validate(Circuit(15), cmap)


def test_route_valid_circuit_untouched():
    cmap = melbourne_map()
    c = Circuit(14).h(1).cx(1, 0).cx(5, 9)
    r = route(c, cmap)
    assert r.swaps_inserted == 0 and r.circuit.ops == c.ops


def test_route_along_path():
    cmap = melbourne_map()
    assert cmap.shortest_path(0, 3) == [0, 1, 2, 3]
    r = route(Circuit(4).cx(0, 3), cmap)
    swaps = [op.qubits for op in r.circuit.ops if op.kind == "SWAP"]
    assert swaps == [(0, 1), (1, 2)]
    assert r.final_layout[0] == 2
    assert not validate(r.circuit, cmap, "Strict")
    assert unitary_equivalent(Circuit(4).cx(0, 3), route(Circuit(4).cx(0, 3), cmap.induced(range(4))))


def test_reversed_cnot_strict_valid():
    cmap = melbourne_map()
    r = route(Circuit(2).cx(0, 1), cmap)
    assert r.swaps_inserted == 0
    assert not validate(r.circuit, cmap, "Strict")
    assert statevector_equivalent(Circuit(2).cx(0, 1), r)


def test_toffoli_network():
    c = Circuit(3).ccx(0, 1, 2)
    d = decompose_toffoli(c)
    assert len(d) == 15 and d.count("CNOT") == 6
    assert np.allclose(unitary_of(d), unitary_of(c), atol=1e-12)
    assert decompose_toffoli(d).ops == d.ops
    with pytest.raises(RoutingError):
        route(c, melbourne_map(), decompose=False)


@pytest.mark.parametrize("pipeline, expected", [("bitflip", 67), ("erasure", 64)])
def test_pipelines_route_cleanly(pipeline, expected):
    cmap = melbourne_map()
    if pipeline == "bitflip":
        c = build_bitflip_tec_circuit()
    else:
        c = build_erasure_tec_circuit(device_faithful=True)
    r = route(c, cmap)
    assert r.swaps_inserted == expected
    assert validate(r.circuit, cmap, "Strict") == []
    assert statevector_equivalent(c.without({"Measure"}), route(c.without({"Measure"}), cmap))


@pytest.mark.parametrize("pipeline", ["bitflip", "erasure"])
def test_truncated_unitary_equivalence(pipeline):
    cmap = melbourne_map()
    c = build_bitflip_tec_circuit() if pipeline == "bitflip" else build_erasure_tec_circuit(device_faithful=True)
    sub = cmap.induced(cmap.bfs_order(0)[:8])
    t = truncate(c, 8)
    assert len(t) > 0
    assert unitary_equivalent(t, route(t, sub))


def test_random_routing_equivalence():
    rng = np.random.default_rng(2024)
    for i in range(200):
        n = int(rng.integers(2, 7))
        cmap = random_connected_map(n, rng)
        c = random_circuit(n, 20, rng)
        r = route(c, cmap)
        assert not validate(r.circuit, cmap, "Strict"), i
        assert statevector_equivalent(c, r, seed=i), i


def test_disconnected_map():
    cmap = CouplingMap(4, [(0, 1), (2, 3)])
    assert not cmap.is_connected()
    with pytest.raises(RoutingError):
        route(Circuit(4).cx(0, 3), cmap)


def test_restore_layout_returns_home():
    cmap = melbourne_map()
    r = route(Circuit(4).cx(0, 3).cx(3, 0), cmap.induced(range(4)))
    assert unitary_equivalent(Circuit(4).cx(0, 3).cx(3, 0), r)
    assert restore_layout(r).count("SWAP") >= r.swaps_inserted


def test_coupling_map_json():
    cmap = melbourne_map()
    doc = json.loads(json.dumps(cmap.to_json()))
    back = CouplingMap.from_json(doc)
    assert back.edges == cmap.edges and back.num_qubits == 14
    with pytest.raises((ParseError, ValidationError)):
        CouplingMap.from_json({"num_qubits": 2, "edges": [[0, 5]]})
    with pytest.raises((ParseError, ValidationError)):
        CouplingMap(2, [(0, 0)])
