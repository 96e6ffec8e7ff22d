"""Command-line front end.

Every subcommand reads a system config (JSON), writes its artifacts into
``--out`` and is deterministic given the config and ``--seed``.

Exit codes: 0 success, 2 validation or usage error, 3 solver failure, 4 I/O
or malformed JSON, 5 antichain cap exceeded, 6 discretization too coarse,
7 codebook size larger than the available atoms.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .core import DEFAULT_CAP, SUM_CAP, build_lambda, load_config, write_antichain_csv
from .errors import (
    CapExceeded,
    GdquantError,
    IncompleteAntichain,
    InsufficientLevels,
    InvalidN,
    ResolutionTooCoarse,
    SeparationInfeasible,
    SolverError,
    ValidationError,
)
from .geometry import max_separation, realize, sample_measure, write_geometry_csv, write_samples_csv
from .graph import scc_decompose
from .measure import diagnostics, growth_series, write_diagnostics_csv
from .quantizer import dimension_fit, write_fit_csv
from .spectral import classify

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_IO = 4
EXIT_CAP = 5
EXIT_COARSE = 6
EXIT_INVALID_N = 7


def _clean(obj):
    """Replace non-finite floats by ``None`` so the output is strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(path: Path, command: str, body: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "command": command}
    doc.update(body)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(doc), fh, indent=2, allow_nan=False)
        fh.write("\n")


def parse_range(text: str) -> range:
    """``"A:B"`` -> ``range(A, B + 1)`` (both ends inclusive)."""
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B with integers, got {text!r}") from None
    if a > b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return range(a, b + 1)


def parse_schedule(text: str) -> list:
    """``"geometric:A:B"`` -> ``[2**A, ..., 2**B]``."""
    parts = text.split(":")
    if len(parts) != 3 or parts[0] != "geometric":
        raise argparse.ArgumentTypeError(f"expected geometric:A:B, got {text!r}")
    rng = parse_range(f"{parts[1]}:{parts[2]}")
    if rng.start < 0:
        raise argparse.ArgumentTypeError("exponents must be non-negative")
    return [2 ** k for k in rng]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _load(args):
    system, t = load_config(Path(args.config))
    return system, t


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_analyze(args) -> int:
    system, _ = _load(args)
    dec = scc_decompose(system)
    report = classify(system, dec, tol=args.tol)
    body = {"config": str(args.config), "report": report.to_json(dec),
            "comparability": report.verdict.to_json(dec)}
    if args.k_range is not None:
        series = growth_series(system, report, args.k_range, cap=args.cap or SUM_CAP)
        body["growth"] = {"k": list(series.ks), "Q_k": list(series.values), "verdict": series.verdict,
                          "slope": series.slope, "mid_mean": series.mid_mean,
                          "last_mean": series.last_mean}
    out = _outdir(args)
    _write_json(out / "analyze.json", "analyze", body)
    print(f"s_r={report.s_r!r} classification={report.classification.value}")
    return EXIT_OK


def cmd_antichain(args) -> int:
    system, _ = _load(args)
    report = classify(system, scc_decompose(system), tol=args.tol)
    chain = build_lambda(system, args.j, args.cap or DEFAULT_CAP)
    d = diagnostics(system, chain, report.s_r)
    out = _outdir(args)
    with open(out / f"lambda_{args.j}.csv", "w", encoding="utf-8", newline="") as fh:
        write_antichain_csv(chain, fh)
    with open(out / f"diagnostics_{args.j}.csv", "w", encoding="utf-8", newline="") as fh:
        write_diagnostics_csv([(d, d.normalized_sum)], fh)
    _write_json(out / f"antichain_{args.j}.json", "antichain", {
        "config": str(args.config), "j": args.j, "cardinality": d.cardinality, "proxy": d.proxy,
        "normalized_sum": d.normalized_sum, "s_r": report.s_r, "min_len": d.min_len,
        "max_len": d.max_len, "eta": system.eta,
    })
    print(f"Lambda_{args.j}: {d.cardinality} words, normalized sum {d.normalized_sum!r}")
    return EXIT_OK


def cmd_geometry(args) -> int:
    system, t_cfg = _load(args)
    t = args.t if args.t is not None else t_cfg
    geom = realize(system, t)
    t_max, row = max_separation(system)
    chain = build_lambda(system, args.j, args.cap or DEFAULT_CAP)
    out = _outdir(args)
    with open(out / f"geometry_{args.j}.csv", "w", encoding="utf-8", newline="") as fh:
        write_geometry_csv(geom, chain.words, fh)
    _write_json(out / "geometry.json", "geometry", {
        "config": str(args.config), "separation_t": geom.separation_t, "t_max": t_max,
        "limiting_vertex": row + 1, "gaps": geom.gaps.tolist(), "j": args.j,
        "cylinders": chain.cardinality,
    })
    print(f"t={geom.separation_t!r} (max {t_max!r}), {chain.cardinality} cylinders")
    return EXIT_OK


def cmd_sample(args) -> int:
    system, t_cfg = _load(args)
    geom = realize(system, t_cfg)
    points = sample_measure(geom, args.count, args.resolution, seed=args.seed)
    out = _outdir(args)
    with open(out / "samples.csv", "w", encoding="utf-8", newline="") as fh:
        write_samples_csv(points, fh)
    _write_json(out / "sample.json", "sample", {
        "config": str(args.config), "count": args.count, "resolution": args.resolution,
        "seed": args.seed, "max_depth": max(len(p.word) for p in points),
    })
    print(f"{args.count} points written")
    return EXIT_OK


def cmd_quantize(args) -> int:
    system, t_cfg = _load(args)
    geom = realize(system, t_cfg)
    report = classify(system, scc_decompose(system), tol=args.tol)
    fit = dimension_fit(system, geom, args.n_schedule, s_probe=report.s_r,
                        atoms_per_code=args.atoms_per_code, cap=args.cap or DEFAULT_CAP,
                        restarts=args.restarts, seed=args.seed, max_level=args.max_level)
    out = _outdir(args)
    with open(out / "quantize.csv", "w", encoding="utf-8", newline="") as fh:
        write_fit_csv(fit, fh)
    body = {"config": str(args.config), "seed": args.seed, "levels": list(fit.levels),
            "resolutions": fit.resolutions.tolist(), "fit": fit.to_json(report.s_r)}
    _write_json(out / "quantize.json", "quantize", body)
    print(f"slope={fit.slope!r} s_r={report.s_r!r} agree_within={fit.agreement(report.s_r)!r}")
    return EXIT_OK


def cmd_report(args) -> int:
    paths = [Path(p) for p in args.inputs] if args.inputs else sorted(Path(args.out).glob("*.json"))
    out = Path(args.out) / "report.json"
    artifacts = {}
    for p in paths:
        if p.resolve() == out.resolve():
            continue
        with open(p, encoding="utf-8") as fh:
            artifacts[p.name] = json.load(fh)
    _outdir(args)
    _write_json(out, "report", {"artifacts": artifacts})
    print(f"{len(artifacts)} artifacts merged into {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdquant",
        description="Quantization dimension of Markov-type measures on graph-directed fractals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, default=42, help="master random seed (default: 42)")
    common.add_argument("--tol", type=float, default=1e-12, help="root solver tolerance")
    common.add_argument("--cap", type=_positive_int, default=None,
                        help=f"maximum antichain size (default: {DEFAULT_CAP} words, "
                             f"{SUM_CAP} for the words-free Q_k sums)")

    needs_config = argparse.ArgumentParser(add_help=False, parents=[common])
    needs_config.add_argument("--config", required=True, help="system JSON file")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[needs_config], help="dimension root and classification")
    p.add_argument("--k-range", type=parse_range, default=None,
                   help="also compute Q_k for k in A..B, e.g. 2:10")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("antichain", parents=[needs_config], help="write Lambda_j and its diagnostics")
    p.add_argument("--j", type=_positive_int, required=True, help="level j >= 1")
    p.set_defaults(func=cmd_antichain)

    p = sub.add_parser("geometry", parents=[needs_config], help="cylinder intervals of Lambda_j")
    p.add_argument("--j", type=_positive_int, default=1, help="level j >= 1 (default: 1)")
    p.add_argument("--t", type=float, default=None, help="separation constant (default: 0.9 t_max)")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("sample", parents=[needs_config], help="draw points of the measure")
    p.add_argument("--count", type=_positive_int, default=10000)
    p.add_argument("--resolution", type=float, default=1e-3)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("quantize", parents=[needs_config], help="Lloyd quantization and slope fit")
    p.add_argument("--n-schedule", type=parse_schedule, default=parse_schedule("geometric:2:12"),
                   help="codebook sizes, geometric:A:B means 2**A..2**B (default: geometric:2:12)")
    p.add_argument("--atoms-per-code", type=_positive_int, default=50)
    p.add_argument("--restarts", type=_positive_int, default=4)
    p.add_argument("--max-level", type=_positive_int, default=None,
                   help="deepest antichain level to discretize with")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("report", parents=[common], help="merge JSON artifacts into one document")
    p.add_argument("inputs", nargs="*", help="JSON files (default: every *.json in --out)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error: invalid system: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"error: {exc}; raise --cap or lower the level", file=sys.stderr)
        return EXIT_CAP
    except ResolutionTooCoarse as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COARSE
    except InvalidN as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_N
    except (SeparationInfeasible, InsufficientLevels, IncompleteAntichain) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, GdquantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
