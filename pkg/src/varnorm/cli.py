"""Command line interface: ``varnorm {variation,experiment,oracle,plot}``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .experiments import ConfigError, ExperimentConfig, ExperimentKind, load_config, run
from .onsys import read_coeff_csv
from .report import Format, emit, read_records
from .varcore import (
    dyadic_upper_bound,
    extrema_pruned_variation,
    prefix_path,
    sup_variation,
    variation_bruteforce,
    variation_exact,
)

METHODS = ("exact", "brute", "dyadic", "pruned", "sup")


def _variation(args: argparse.Namespace) -> int:
    coeffs = read_coeff_csv(args.coeff_file)
    path = prefix_path(coeffs.coeffs)
    if args.method == "dyadic":
        out = {"method": "DYADIC_UPPER", "value": float(dyadic_upper_bound(path)), "p": 2.0}
    elif args.method == "sup":
        r = sup_variation(path)
        out = {"method": r.method.value, "value": float(r.value), "p": "SUP", "breakpoints": [int(b) for b in r.breakpoints]}
    else:
        fn = {"exact": variation_exact, "brute": variation_bruteforce, "pruned": extrema_pruned_variation}[args.method]
        r = fn(path, args.p)
        out = {"method": r.method.value, "value": float(r.value), "p": r.p, "breakpoints": [int(b) for b in r.breakpoints]}
    out["N"] = coeffs.n
    print(json.dumps(out))
    return 0


def _print_summary(summary: dict, stream=None) -> None:
    stream = stream or sys.stdout
    print(f"# {summary['note']}", file=stream)
    if "oracle" in summary:
        o = summary["oracle"]
        print(f"instances={o['instances']}\tmismatches={o['mismatches']}\tmax_gap={o['max_gap']:.3e}", file=stream)
        return
    cols = ("ordering", "N", "kind", "count", "mean", "stderr", "rms")
    print("\t".join(cols), file=stream)
    for g in summary["groups"]:
        print("\t".join(f"{g[c]:.6g}" if isinstance(g[c], float) else str(g[c]) for c in cols), file=stream)
    for d in summary.get("paired_ratios", []):
        print(f"paired\t{d['ordering']}/IDENTITY\tN={d['N']}\tmedian={d['median_ratio']:.6g}", file=stream)


def _write_outputs(result, out_dir: Path, timing: bool) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt, name in ((Format.CSV, "records.csv"), (Format.JSON, "records.json"), (Format.SVG, "records.svg")):
        if fmt is Format.SVG and result.config.experiment is ExperimentKind.ORACLE_SUITE:
            continue
        emit(result.records, fmt, out_dir / name, result.summary, timing)
        written.append(out_dir / name)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(result.summary, indent=2, default=_json_default) + "\n")
    written.append(summary_path)
    return written


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _experiment(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    result = run(config, force=args.force)
    out = Path(args.out) if args.out else Path("results") / Path(args.config).stem
    written = _write_outputs(result, out, timing=not args.no_timing)
    _print_summary(result.summary)
    for p in written:
        print(f"wrote {p}", file=sys.stderr)
    return 0


def _oracle(args: argparse.Namespace) -> int:
    config = ExperimentConfig(ExperimentKind.ORACLE_SUITE, seed=args.seed, instances=args.instances, n_max=args.n_max)
    if args.n_max > 20:
        raise ConfigError("--n-max is limited to 20 by the brute-force oracle")
    result = run(config)
    if args.out:
        _write_outputs(result, Path(args.out), timing=True)
    _print_summary(result.summary)
    return 0 if result.summary["oracle"]["mismatches"] == 0 else 1


def _plot(args: argparse.Namespace) -> int:
    records = read_records(args.records)
    emit(records, Format.SVG, args.output)
    print(f"wrote {args.output}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varnorm", description="p-variation norms of orthonormal-system partial sums")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("variation", help="variation of a coefficient sequence read as increments")
    p.add_argument("coeff_file", help="CSV with header index,re,im")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--method", choices=METHODS, default="exact")
    p.set_defaults(func=_variation)

    p = sub.add_parser("experiment", help="run a JSON experiment config")
    p.add_argument("config")
    p.add_argument("-o", "--out", help="output directory (default results/<config name>)")
    p.add_argument("--force", action="store_true", help="ignore the exact-DP budget guard")
    p.add_argument("--no-timing", action="store_true", help="write 0 for wall-time fields (byte-stable output)")
    p.set_defaults(func=_experiment)

    p = sub.add_parser("oracle", help="DP versus brute force on random instances")
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("-o", "--out", help="also write records to this directory")
    p.set_defaults(func=_oracle)

    p = sub.add_parser("plot", help="SVG chart from a records CSV")
    p.add_argument("records")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_plot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"varnorm: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"varnorm: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
