"""Find the noise strength p1 = p2 = p at which the device-sized erasure
pipeline, followed by single-qubit tomography, lands on a target fidelity.

    python3 scripts/fidelity_band.py --target 0.8325
"""

import argparse
import json

from tecsim.channels import ErasureMode, ErrorKind, ErrorSpec
from tecsim.tec import bisect_noise, build_erasure_tec_circuit
from tecsim.tec.analysis import message_amplitudes
from tecsim.tomography import reconstruct, report_to_json, sample_counts

def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--target", type=float, default=0.8325)
    ap.add_argument("--tol", type=float, default=0.01)
    ap.add_argument("--erased", type=int, default=0, help="erased message qubit, -1 for none")
    ap.add_argument("--trajectories", type=int, default=200)
    ap.add_argument("--shots", type=int, default=8192, help="tomography shots per setting")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    spec = ErrorSpec() if args.erased < 0 else ErrorSpec(ErrorKind.ERASURE, args.erased,
                                                          erasure_mode=ErasureMode.GATE_REMOVAL)
    c = build_erasure_tec_circuit(spec, device_faithful=True)
    p, f, dq = bisect_noise(c, args.target, trajectories=args.trajectories, seed=args.seed, tol=args.tol)
    rep = reconstruct(sample_counts(dq, args.shots, args.seed), message_amplitudes(c))
    out = {"p": p, "fidelity_exact": f, "tomography": report_to_json(rep)}
    print(json.dumps(out, indent=2, default=float))

if __name__ == "__main__":
    main()
