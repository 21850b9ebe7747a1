"""Batch runner: ``tecsim run --config <file> [overrides]``.

``shots=0`` is exact mode (branch-resolved probabilities, analytic
fidelity).  ``shots>0`` samples; with a noise model every shot is an
independent noisy trajectory and the reported fidelity is the trajectory
mean.  Outputs depend only on the config and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import qsim
from .channels import ErasureMode, ErrorKind, ErrorSpec, NoiseModel, apply_noise
from .circuit import Circuit, simulate
from .errors import CapacityError, TecsimError, UncorrectableError, ValidationError
from .layout import melbourne_map, route, validate
from .qsim import RandomSource
from .tec import analysis
from .tec.bitflip import build_bitflip_tec_circuit, build_phaseflip_tec_circuit
from .tec.codes import BlockLayout, MessageMode, MessageParams
from .tec.erasure import build_erasure_tec_circuit, extract_erasure_flag
from .tomography import reconstruct, report_to_json, sample_counts

PIPELINES = ("bitflip", "phaseflip", "erasure")
FORMATS = ("json", "csv")
SWEEPS = ("all-single",)
OUTPUT_VERSION = 1
PLOT_HEADER = ["row", "col", "real_exp", "imag_exp", "real_ideal", "imag_ideal"]
KIND_FOR_PIPELINE = {"bitflip": ErrorKind.BIT_FLIP, "phaseflip": ErrorKind.PHASE_FLIP,
                     "erasure": ErrorKind.ERASURE}


@dataclass
class ExperimentConfig:
    pipeline: str = "bitflip"
    error: dict | str | None = None
    erasure_mode: str = ErasureMode.GATE_REMOVAL.value
    shots: int = 0
    seed: int = 0
    noise: dict | None = None
    tomography: bool = False
    tomography_shots: int = 8192
    route: bool = False
    conditionals: str = "coherent"
    device_faithful: bool = False
    message: dict = field(default_factory=lambda: asdict(MessageParams()))
    message_mode: str = MessageMode.ROTATION.value
    output: dict = field(default_factory=lambda: {"path": None, "format": None})

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ValidationError(f"pipeline must be one of {PIPELINES}, got {self.pipeline!r}")
        if isinstance(self.error, str) and self.error not in SWEEPS:
            raise ValidationError(f"error sweep must be one of {SWEEPS}, got {self.error!r}")
        if isinstance(self.shots, bool) or not isinstance(self.shots, int) or self.shots < 0:
            raise ValidationError(f"shots must be an integer >= 0 (0 = exact mode), got {self.shots!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**63:
            raise ValidationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.tomography_shots < 1:
            raise ValidationError(f"tomography_shots must be >= 1, got {self.tomography_shots}")
        if self.conditionals not in ("coherent", "measured"):
            raise ValidationError(f"conditionals must be 'coherent' or 'measured', got {self.conditionals!r}")
        ErasureMode(self.erasure_mode)
        MessageMode(self.message_mode)
        if not isinstance(self.message, dict) or set(self.message) - {"alpha", "beta"}:
            raise ValidationError(f"message must be an object with fields alpha and beta, got {self.message!r}")
        MessageParams(**self.message)
        if self.noise is not None and (not isinstance(self.noise, dict)
                                       or set(self.noise) - {"p1", "p2", "p_readout"}):
            raise ValidationError(f"noise must be an object with fields p1, p2, p_readout, got {self.noise!r}")
        if not self.noise_model.is_noiseless and self.shots < 1:
            raise ValidationError("a noise model needs shots >= 1 (one trajectory per shot)")
        fmt = self.output.get("format")
        if fmt is not None and fmt not in FORMATS:
            raise ValidationError(f"output format must be one of {FORMATS}, got {fmt!r}")
        self.specs()

    @property
    def noise_model(self) -> NoiseModel:
        return NoiseModel(**(self.noise or {}))

    @property
    def is_sweep(self) -> bool:
        return isinstance(self.error, str)

    @property
    def format(self) -> str:
        return self.output.get("format") or ("csv" if self.is_sweep else "json")

    def specs(self) -> list[ErrorSpec]:
        kind = KIND_FOR_PIPELINE[self.pipeline]
        mode = self.erasure_mode if kind is ErrorKind.ERASURE else None
        if self.error == "all-single":
            if kind is ErrorKind.ERASURE:
                return [ErrorSpec(kind, q, erasure_mode=mode) for q in range(4)]
            return [ErrorSpec()] + [ErrorSpec(kind, q) for q in range(3)]
        if self.error is None:
            return [ErrorSpec()]
        d = dict(self.error)
        if d.get("kind") == ErrorKind.ERASURE.value:
            d.setdefault("erasure_mode", self.erasure_mode)
        return [ErrorSpec.from_json(d)]

    @classmethod
    def from_json(cls, doc: Any) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**doc)

    def to_json(self) -> dict:
        return asdict(self)


def case_seed(seed: int, index: int) -> int:
    """Seed of sweep case ``index``, derived from ``(seed, index)``."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0] >> 1)


def build(config: ExperimentConfig, spec: ErrorSpec) -> Circuit:
    kw = dict(params=MessageParams(**config.message), message_mode=config.message_mode,
              conditionals=config.conditionals)
    if config.pipeline == "bitflip":
        return build_bitflip_tec_circuit(spec, **kw)
    if config.pipeline == "phaseflip":
        return build_phaseflip_tec_circuit(spec, **kw)
    return build_erasure_tec_circuit(spec, device_faithful=config.device_faithful, **kw)


def _flags(circuit: Circuit, spec: ErrorSpec, records) -> dict[str, float]:
    """Distribution of extracted erasure flags over QND records ``(bits, weight)``."""
    hint = () if spec.kind is ErrorKind.NONE else (spec.qubit,)
    out: dict[str, float] = {}
    for bits, w in records:
        try:
            flag = extract_erasure_flag(bits, hint, analysis_layout(circuit))
            key = "".join(map(str, sorted(flag.erased))) or "none"
            if flag.ambiguous:
                key += "?"
        except UncorrectableError:
            key = "uncorrectable"
        out[key] = out.get(key, 0) + w
    return dict(sorted(out.items()))


def analysis_layout(circuit: Circuit) -> BlockLayout:
    return BlockLayout.from_json(circuit.metadata["layout"])


def run_case(config: ExperimentConfig, spec: ErrorSpec, index: int) -> dict:
    seed = case_seed(config.seed, index)
    circuit = build(config, spec)
    rec: dict[str, Any] = {"case": index, "error": spec.to_json(), "seed": seed}
    executed = circuit
    if config.route:
        if circuit.num_qubits > 14:
            raise CapacityError(f"case {index}: {circuit.num_qubits}-qubit circuit does not fit the "
                                "14-qubit map; set device_faithful for the erasure pipeline")
        cmap = melbourne_map()
        routed = route(circuit, cmap)
        executed = routed.circuit
        rec["route"] = {"swaps": routed.swaps_inserted,
                        "violations": len(validate(executed, cmap, "AllowReversed")),
                        "final_layout": list(routed.final_layout)}
    qnd = [d["cbit"] for d in circuit.metadata.get("qnd", [])]
    model = config.noise_model
    rho = None
    if config.shots == 0:
        dist = analysis.decoded_distribution(executed)
        rec["decoded"] = {str(k): v for k, v in dist.items()}
        rho = analysis.output_density(circuit)
        rec["fidelity"] = analysis.decoded_fidelity(circuit, rho)
        if qnd:
            marg = analysis.cbit_marginal(executed, qnd)
            rec["qnd"] = marg
            rec["flag"] = _flags(circuit, spec, [(tuple(map(int, k)), p) for k, p in marg.items()])
    elif model.is_noiseless:
        res = simulate(executed, config.shots, seed)
        counts = {0: 0, 1: 0}
        for row in res.cbit_values:
            counts[analysis.logical_bit(circuit, row)] += 1
        rec["decoded"] = {str(k): v for k, v in counts.items()}
        rho = analysis.output_density(circuit)
        rec["fidelity"] = analysis.decoded_fidelity(circuit, rho)
        if qnd:
            rows = [tuple(int(r[c]) for c in qnd) for r in res.cbit_values]
            rec["flag"] = _flags(circuit, spec, [(r, 1) for r in rows])
    else:
        root = RandomSource(seed)
        psi = analysis.target_state(circuit)
        counts = {0: 0, 1: 0}
        fids = []
        rows = []
        total = 0
        for shot in range(config.shots):
            noisy = apply_noise(executed, model, root.spawn(shot))
            res = simulate(noisy, 1, case_seed(seed, shot), readout_error=model.p_readout)
            counts[analysis.logical_bit(circuit, res.cbit_values[0])] += 1
            rows.append(tuple(int(res.cbit_values[0][c]) for c in qnd))
            noisy_logical = apply_noise(circuit, model, root.spawn(shot)) if config.route else noisy
            r = analysis.output_density(noisy_logical)
            fids.append(qsim.fidelity_pure(r, psi))
            total = total + r
        rho = total / config.shots
        rec["decoded"] = {str(k): v for k, v in counts.items()}
        rec["fidelity"] = float(np.mean(fids))
        rec["trajectories"] = config.shots
        if qnd:
            rec["flag"] = _flags(circuit, spec, [(r, 1) for r in rows])
    if config.pipeline != "erasure" and model.is_noiseless:
        rec["syndrome"] = list(analysis.syndrome(circuit).as_tuple())
    if config.tomography:
        dq = analysis.decoded_qubit_density(circuit, rho)
        counts = sample_counts(dq, config.tomography_shots, seed, readout_error=model.p_readout)
        amps = analysis.message_amplitudes(circuit)
        rep = reconstruct(counts, amps)
        ideal = qsim.pure_density(amps)
        rec["tomography"] = report_to_json(rep)
        rec["ideal"] = {"real": np.real(ideal).tolist(), "imag": np.imag(ideal).tolist()}
    return rec


def _threads() -> int:
    env = os.environ.get("TECSIM_THREADS")
    if env is None:
        return max(1, min(4, os.cpu_count() or 1))
    try:
        n = int(env)
    except ValueError:
        raise ValidationError(f"TECSIM_THREADS must be a positive integer, got {env!r}") from None
    if n < 1:
        raise ValidationError(f"TECSIM_THREADS must be a positive integer, got {env!r}")
    return n


def run(config: ExperimentConfig, timing: bool = False) -> dict:
    """Run every case; case order in the result follows the sweep order."""
    specs = config.specs()

    def one(i: int) -> dict:
        t0 = time.perf_counter()
        try:
            rec = run_case(config, specs[i], i)
        except TecsimError as e:
            raise type(e)(f"case {i} ({specs[i].to_json()}): {e}") from e
        if timing:
            rec["wall_time_s"] = time.perf_counter() - t0
        return rec

    workers = min(_threads(), len(specs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            cases = list(pool.map(one, range(len(specs))))
    else:
        cases = [one(i) for i in range(len(specs))]
    return {"version": OUTPUT_VERSION, "config": config.to_json(), "cases": cases}


# ---------------------------------------------------------------------------
# output


CSV_FIELDS = ["case", "pipeline", "error_kind", "error_qubit", "erasure_mode", "seed", "shots",
              "p_logical_0", "p_logical_1", "fidelity", "syndrome", "flag", "tomography_fidelity", "swaps"]


def _fmt(x: float) -> str:
    return repr(float(x))


def to_csv(record: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    cfg = record["config"]
    for c in record["cases"]:
        dec = c["decoded"]
        tot = sum(dec.values())
        flag = c.get("flag")
        w.writerow([
            c["case"], cfg["pipeline"], c["error"]["kind"],
            "" if c["error"]["qubit"] is None else c["error"]["qubit"],
            c["error"].get("erasure_mode", ""), c["seed"], cfg["shots"],
            _fmt(dec["0"] / tot), _fmt(dec["1"] / tot), _fmt(c["fidelity"]),
            "".join(map(str, c["syndrome"])) if "syndrome" in c else "",
            ";".join(f"{k}:{v}" for k, v in flag.items()) if flag else "",
            _fmt(c["tomography"]["fidelity"]) if "tomography" in c else "",
            c["route"]["swaps"] if "route" in c else "",
        ])
    return buf.getvalue()


def to_json_text(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def emit_plot_data(record: dict) -> str:
    """Density-matrix bars of one case: experimental and ideal side by side."""
    if "tomography" not in record:
        raise ValidationError("record has no tomography report; run with tomography enabled")
    rep, ideal = record["tomography"], record["ideal"]
    n = rep["n"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_HEADER)
    for r in range(1 << n):
        for c in range(1 << n):
            w.writerow([qsim.bitstring(r, n), qsim.bitstring(c, n),
                        _fmt(rep["real"][r][c]), _fmt(rep["imag"][r][c]),
                        _fmt(ideal["real"][r][c]), _fmt(ideal["imag"][r][c])])
    return buf.getvalue()


def write_outputs(record: dict, path: str | None, fmt: str) -> list[str]:
    text = to_csv(record) if fmt == "csv" else to_json_text(record)
    written = []
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    if path is not None and record["config"]["tomography"]:
        stem = os.path.splitext(path)[0]
        for c in record["cases"]:
            plot = f"{stem}.case{c['case']}.plot.csv"
            with open(plot, "w", encoding="utf-8", newline="") as fh:
                fh.write(emit_plot_data(c))
            written.append(plot)
    return written


# ---------------------------------------------------------------------------
# argument handling


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tecsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", help="JSON experiment config")
    r.add_argument("--pipeline", choices=PIPELINES)
    r.add_argument("--error-kind", help="None, BitFlip, PhaseFlip, BitPhaseFlip, Erasure or all-single")
    r.add_argument("--error-qubit", type=int)
    r.add_argument("--erasure-mode", choices=[m.value for m in ErasureMode])
    r.add_argument("--shots", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--noise-p1", type=float)
    r.add_argument("--noise-p2", type=float)
    r.add_argument("--noise-readout", type=float)
    r.add_argument("--tomography", action=argparse.BooleanOptionalAction, default=None)
    r.add_argument("--route", action=argparse.BooleanOptionalAction, default=None)
    r.add_argument("--conditionals", choices=("coherent", "measured"))
    r.add_argument("--device-faithful", action=argparse.BooleanOptionalAction, default=None)
    r.add_argument("--out")
    r.add_argument("--format", choices=FORMATS)
    r.add_argument("--timing", action="store_true", help="add wall-time per case (outputs stop being reproducible)")
    return p


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    except OSError as e:
        raise ValidationError(f"cannot read config {path}: {e.strerror}") from None


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    doc = load_config(args.config)
    if not isinstance(doc, dict):
        raise ValidationError("config must be a JSON object")
    cfg = ExperimentConfig.from_json(doc)
    over: dict[str, Any] = {}
    for name in ("pipeline", "shots", "seed", "tomography", "route", "conditionals", "device_faithful",
                 "erasure_mode"):
        v = getattr(args, name)
        if v is not None:
            over[name] = v
    if args.error_kind is not None:
        if args.error_kind in SWEEPS:
            over["error"] = args.error_kind
        elif args.error_kind == "None":
            over["error"] = None
        else:
            over["error"] = {"kind": args.error_kind, "qubit": args.error_qubit}
    elif args.error_qubit is not None:
        if not isinstance(cfg.error, dict):
            raise ValidationError("--error-qubit needs --error-kind or an error object in the config")
        over["error"] = {**cfg.error, "qubit": args.error_qubit}
    noise = dict(cfg.noise or {})
    for flag, key in (("noise_p1", "p1"), ("noise_p2", "p2"), ("noise_readout", "p_readout")):
        v = getattr(args, flag)
        if v is not None:
            noise[key] = v
    if noise:
        over["noise"] = noise
    output = dict(cfg.output)
    if args.out is not None:
        output["path"] = args.out
    if args.format is not None:
        output["format"] = args.format
    over["output"] = output
    return replace(cfg, **over)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        record = run(cfg, timing=args.timing)
        write_outputs(record, cfg.output.get("path"), cfg.format)
    except (TecsimError, ValueError) as e:
        print(f"tecsim: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
