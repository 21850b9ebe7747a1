"""Decoded-qubit fidelity against gate-noise strength for both pipelines.

    python3 scripts/noise_sweep.py --out noise_sweep.csv
"""

import argparse
import csv
import sys

import numpy as np

from tecsim.channels import ErasureMode, ErrorKind, ErrorSpec
from tecsim.tec import build_bitflip_tec_circuit, build_erasure_tec_circuit, decoded_fidelity_under_noise


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p-max", type=float, default=0.02)
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--trajectories", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args(argv)

    circuits = {
        "bitflip/X1": build_bitflip_tec_circuit(ErrorSpec(ErrorKind.BIT_FLIP, 1)),
        "erasure-device/E0": build_erasure_tec_circuit(
            ErrorSpec(ErrorKind.ERASURE, 0, erasure_mode=ErasureMode.GATE_REMOVAL), device_faithful=True),
    }
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["circuit", "p", "fidelity"])
    for name, c in circuits.items():
        for p in np.linspace(0, args.p_max, args.points):
            f, _ = decoded_fidelity_under_noise(c, float(p), args.trajectories, args.seed)
            w.writerow([name, f"{p:.5f}", f"{f:.6f}"])
            fh.flush()
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
