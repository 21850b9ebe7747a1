"""SWAP overhead and validity of both pipelines on the 14-qubit Melbourne map."""

from tecsim.layout import DirectionPolicy, melbourne_map, route, statevector_equivalent, validate
from tecsim.tec import build_bitflip_tec_circuit, build_erasure_tec_circuit


def main():
    cmap = melbourne_map()
    circuits = {
        "bitflip": build_bitflip_tec_circuit(),
        "erasure-device": build_erasure_tec_circuit(device_faithful=True),
    }
    print(f"{'pipeline':16s} {'gates':>6s} {'routed':>7s} {'swaps':>6s} {'strict':>7s} {'equiv':>6s}")
    for name, c in circuits.items():
        r = route(c, cmap)
        bad = len(validate(r.circuit, cmap, DirectionPolicy.STRICT))
        body = c.without({"Measure"})
        eq = statevector_equivalent(body, route(body, cmap))
        print(f"{name:16s} {len(c):6d} {len(r.circuit):7d} {r.swaps_inserted:6d} {bad:7d} {str(eq):>6s}")


if __name__ == "__main__":
    main()
