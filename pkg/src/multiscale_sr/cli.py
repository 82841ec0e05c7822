"""Command-line interface.

Exit codes: 0 on success, 1 on I/O or flag errors, 2 when the requested
configuration is not invertible.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .experiments import (coprime_scan, run_noise_experiment, scale_count_comparison,
                          trace_convergence_sweep)
from .io import (FormatError, load_measurements, load_target, save_measurements, write_manifest,
                 write_signal)
from .reconstruction import (Method, PadPolicy, PlanError, ReconstructionConfig, SizeGuardError,
                             dense_oracle, reconstruct)
from .signals import ConvMode, Normalization, ShapeError, add_noise, apply_T
from .spectral import (NonInvertibleError, condition_number, finite_condition_number,
                       predicted_mse, stacked_profile, tradeoff_lower_bound)
from .targets import TargetKind, TargetSpec, make_target

EXIT_OK, EXIT_USAGE, EXIT_SINGULAR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _finite(x):
    """JSON-safe value: non-finite floats become ``None``."""
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(_finite(obj), indent=2) + "\n")


def _write_rows(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (";".join(map(str, v)) if isinstance(v, (list, tuple)) else v) for k, v in r.items()})


# --- commands ---------------------------------------------------------------

def cmd_synth(args, argv) -> int:
    kind = TargetKind(args.kind)
    d = args.d or (1 if kind is TargetKind.GRATING else 2)
    shape = (args.n,) * d if args.m is None else (args.n, args.m)
    spec = TargetSpec(kind, shape, seed=args.seed, period=args.period, bar_start=args.bar_start,
                      bar_growth=args.bar_growth, sectors=args.sectors, low=args.low, high=args.high,
                      path=args.path)
    signal = make_target(spec)
    fmt = args.format or ("pgm" if signal.dims == 2 else "csv")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / f"{args.name}.{fmt}"
    write_signal(data_path, signal, binary=args.binary)
    write_manifest(out / f"{args.name}.json", "target", [data_path], spec.as_dict(), argv, args.seed)
    print(out / f"{args.name}.json")
    return EXIT_OK


def cmd_measure(args, argv) -> int:
    u = load_target(args.target)
    ms = apply_T(u, args.scales, args.mode, args.norm)
    if args.sigma > 0:
        ms = add_noise(ms, args.sigma, args.seed)
    path = save_measurements(args.out, ms, args.format, args.binary, argv, args.seed, args.name)
    print(path)
    return EXIT_OK


def cmd_reconstruct(args, argv) -> int:
    ms = load_measurements(args.input)
    cfg = ReconstructionConfig(args.method, args.lam, args.max_iter, args.tol, args.pad)
    result = reconstruct(ms, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_signal(out, result.signal, binary=args.binary)
    report = result.report()
    report["origin"] = list(result.signal.origin)
    report_path = Path(args.report) if args.report else out.with_suffix(".report.json")
    _dump(report_path, report)
    print(out)
    return EXIT_OK


def analyze_summary(scales, n: int, d: int, norm: Normalization) -> tuple[dict, object]:
    prof = stacked_profile(scales, n, d, norm)
    kappa = condition_number(prof)
    summary = {"scales": list(scales), "n": n, "d": d, "normalization": Normalization(norm).value,
               "coprime": prof.coprime, "invertible": prof.invertible, "kappa": kappa,
               "kappa_infinite": math.isinf(kappa), "kappa_finite": finite_condition_number(prof)}
    if prof.invertible:
        pred = predicted_mse(prof)
        summary.update(trace_normalized=pred.trace_normalized, rmse_factor=pred.rmse_factor,
                       asymptotic_trace=pred.asymptotic_value, lower_bound=pred.lower_bound)
    else:
        summary.update(trace_normalized=math.inf, rmse_factor=math.inf, asymptotic_trace=math.nan,
                       lower_bound=tradeoff_lower_bound(scales, d), zero_frequency_index=list(prof.argmin))
    return summary, prof


def cmd_analyze(args, argv) -> int:
    summary, prof = analyze_summary(args.scales, args.n, args.d, args.norm)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        w = prof.frequencies()
        with open(out / "spectrum.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            if args.d == 1:
                writer.writerow(["index", "omega", "singular_value"])
                for i, s in enumerate(prof.sigma_values):
                    writer.writerow([i, repr(float(w[i])), repr(float(s))])
            else:
                writer.writerow(["i", "j", "omega1", "omega2", "singular_value"])
                for (i, j), s in np.ndenumerate(prof.sigma_values):
                    writer.writerow([i, j, repr(float(w[i])), repr(float(w[j])), repr(float(s))])
        _dump(out / "summary.json", summary)
    print(json.dumps(_finite(summary), indent=2))
    return EXIT_OK


def cmd_experiment(args, argv) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = {"argv": argv, "seed": args.seed}
    if args.kind == "noise":
        target = load_target(args.target) if args.target else make_target(
            TargetSpec(TargetKind.RANDOM, (args.n,) * args.d, seed=args.seed))
        rep = run_noise_experiment(target, args.scales, args.mode, args.sigma, args.trials,
                                   args.method, args.lam, args.seed, args.norm)
        _dump(out / "report.json", {**rep.to_dict(), "provenance": config})
    elif args.kind == "scan":
        scan = coprime_scan(args.kmax, args.n, args.d, args.mode, max_combos=args.max_combos)
        _write_rows(out / "scan.csv", scan.rows())
        _dump(out / "report.json", {"n": args.n, "d": args.d, "mode": scan.mode, "kmax": args.kmax,
                                    "rows": scan.rows(), "provenance": config})
    elif args.kind == "scale-count":
        target = load_target(args.target) if args.target else make_target(
            TargetSpec(TargetKind.PINWHEEL, (args.n, args.n)))
        scales = args.scales if len(args.scales) == 3 else (9, 10, 11)
        rep = scale_count_comparison(target, scales, args.lam, args.sigma, args.seed)
        write_signal(out / "target.pgm", target, binary=args.binary)
        for sub, est, res in zip(rep.subsets, rep.reconstructions, rep.residuals):
            tag = "-".join(map(str, sub))
            write_signal(out / f"recon_{tag}.pgm", est, binary=args.binary)
            write_signal(out / f"residual_{tag}.pgm", res, binary=args.binary)
        rows = [{"scales": list(s), "rmse": r, "blind_energy_fraction": f}
                for s, r, f in zip(rep.subsets, rep.rmse, rep.blind_energy_fraction)]
        _write_rows(out / "scale_count.csv", rows)
        _dump(out / "report.json", {**rep.to_dict(), "provenance": config})
    else:
        n_list = args.n_list or [50, 100, 200, 400, 1000, 10000]
        rows = trace_convergence_sweep(args.scales, args.d, n_list)
        _write_rows(out / "trace.csv", rows)
        _dump(out / "report.json", {"scales": args.scales, "d": args.d, "rows": rows, "provenance": config})
    print(out / "report.json")
    return EXIT_OK


def cmd_oracle(args, argv) -> int:
    ms = load_measurements(args.input)
    u = dense_oracle(ms, args.lam)
    write_signal(args.out, u, binary=args.binary)
    print(args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="multiscale-sr", description="Multiscale box-measurement super-resolution.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic target and its manifest")
    s.add_argument("--kind", choices=[k.value for k in TargetKind], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, help="second axis length (2-D)")
    s.add_argument("--d", type=int, choices=(1, 2))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--period", type=int, default=1)
    s.add_argument("--bar-start", type=int, default=2)
    s.add_argument("--bar-growth", type=float, default=1.0)
    s.add_argument("--sectors", type=int, default=36)
    s.add_argument("--low", type=float, default=0.0)
    s.add_argument("--high", type=float, default=1.0)
    s.add_argument("--path", help="source file for --kind file")
    s.add_argument("--format", choices=("csv", "pgm"))
    s.add_argument("--binary", action="store_true")
    s.add_argument("--name", default="target")
    s.add_argument("--out", default=".")
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("measure", help="simulate box measurements of a target")
    m.add_argument("--target", required=True)
    m.add_argument("--scales", type=_int_list, required=True)
    m.add_argument("--mode", choices=[c.value for c in ConvMode], default="valid")
    m.add_argument("--norm", choices=[c.value for c in Normalization], default="unit")
    m.add_argument("--sigma", type=float, default=0.0)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--format", choices=("csv", "pgm"), default="csv")
    m.add_argument("--binary", action="store_true")
    m.add_argument("--name", default="measurements")
    m.add_argument("--out", default=".")
    m.set_defaults(func=cmd_measure)

    r = sub.add_parser("reconstruct", help="reconstruct a signal from a measurement manifest")
    r.add_argument("input")
    r.add_argument("--method", choices=[c.value for c in Method], default="fourier")
    r.add_argument("--lambda", dest="lam", type=float, default=0.0)
    r.add_argument("--tol", type=float, default=1e-10)
    r.add_argument("--max-iter", type=int)
    r.add_argument("--pad", choices=[c.value for c in PadPolicy], default="reject")
    r.add_argument("--out", default="reconstruction.csv")
    r.add_argument("--report")
    r.add_argument("--binary", action="store_true")
    r.set_defaults(func=cmd_reconstruct)

    a = sub.add_parser("analyze", help="spectral analysis of a scale set")
    a.add_argument("--scales", type=_int_list, required=True)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--d", type=int, choices=(1, 2), default=1)
    a.add_argument("--norm", choices=[c.value for c in Normalization], default="mean")
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("experiment", help="run a simulated experiment")
    e.add_argument("kind", choices=("noise", "scan", "scale-count", "trace"))
    e.add_argument("--scales", type=_int_list, default=[9, 11])
    e.add_argument("--target")
    e.add_argument("--n", type=int, default=1024)
    e.add_argument("--n-list", type=_int_list)
    e.add_argument("--d", type=int, choices=(1, 2), default=1)
    e.add_argument("--mode", choices=[c.value for c in ConvMode], default="cyclic")
    e.add_argument("--norm", choices=[c.value for c in Normalization], default="mean")
    e.add_argument("--method", choices=[c.value for c in Method], default="fourier")
    e.add_argument("--sigma", type=float, default=1.0)
    e.add_argument("--lambda", dest="lam", type=float, default=0.0)
    e.add_argument("--trials", type=int, default=256)
    e.add_argument("--kmax", type=int, default=25)
    e.add_argument("--max-combos", type=int)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--binary", action="store_true")
    e.add_argument("--out", default="experiment")
    e.set_defaults(func=cmd_experiment)

    o = sub.add_parser("oracle", help="dense minimum-norm least squares (small problems)")
    o.add_argument("input")
    o.add_argument("--lambda", dest="lam", type=float, default=0.0)
    o.add_argument("--out", default="oracle.csv")
    o.add_argument("--binary", action="store_true")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, ["multiscale-sr", *argv])
    except NonInvertibleError as exc:
        print(f"error: non-invertible configuration: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (OSError, FormatError, ShapeError, PlanError, SizeGuardError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
