"""Command-line interface: simulate, analyze, benchmark.

simulate  writes a synthetic benchmark series (CSV) plus its ground-truth
          edge list (JSON).
analyze   reads a series CSV, runs the chosen embedding algorithm for every
          target, and writes a JSON report plus a CTE matrix CSV; a short
          summary of the strongest senders goes to standard output.
benchmark runs a JSON-described grid and writes aggregate and
          per-realization CSVs.

Exit codes: 0 success, 2 bad flags (message names the flag), 3 malformed
input CSV (including fewer than 2 channels), 4 series too short for the
requested lag depth, 1 any other package error.

The analyze path assumes any anti-aliasing or downsampling happened
upstream; this tool never filters or resamples.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .benchmark import load_grid, run_grid, write_grid_csv, write_realizations_csv
from .data_model import read_series_csv, write_series_csv
from .errors import CsvFormatError, EntropyEmbedError, SeriesTooShort
from .nue import NueConfig, dependency_matrix
from .simgen import henon, mix, nonlinear_ar, write_truth_json

REPORT_SCHEMA_VERSION = 1


def _default_workers() -> int:
    env = os.environ.get("ENTROPY_EMBED_WORKERS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropy-embed",
        description="Directed-dependency estimation via non-uniform embedding.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic benchmark series")
    sim.add_argument("--model", required=True, choices=["henon", "ar"])
    sim.add_argument("--n", type=int, required=True, help="samples to keep")
    sim.add_argument("--q", type=float, default=0.6,
                     help="Henon coupling strength (ignored for ar)")
    sim.add_argument("--alpha", type=float, default=0.0,
                     help="instantaneous mixing strength")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="series CSV path")
    sim.add_argument("--truth-out", default=None,
                     help="ground-truth JSON path (optional)")

    ana = sub.add_parser(
        "analyze", help="estimate directed dependencies from a series CSV",
        epilog="Input is used as-is: apply any anti-aliasing/downsampling "
               "before exporting the CSV.")
    ana.add_argument("--input", required=True, help="series CSV path")
    ana.add_argument("--algorithm", default="msr",
                     choices=["msr", "bootstrap", "la", "aic"])
    ana.add_argument("--m", type=int, default=1, help="embedding delay")
    ana.add_argument("--d", type=int, default=5, help="embedding dimension")
    ana.add_argument("--k-neighbors", type=int, default=10)
    ana.add_argument("--lambda", dest="lam", type=float, default=1.0,
                     help="MSR/CMI blend weight in [0, 1]")
    ana.add_argument("--gamma", type=float, default=0.0,
                     help="minimum MSR improvement to keep a candidate")
    ana.add_argument("--theiler", type=int, default=0)
    ana.add_argument("--bootstrap-size", type=int, default=100)
    ana.add_argument("--percentile", type=float, default=95.0)
    ana.add_argument("--max-iterations", type=int, default=None)
    ana.add_argument("--seed", type=int, default=0)
    ana.add_argument("--workers", type=int, default=None,
                     help="parallel target workers (default: "
                          "ENTROPY_EMBED_WORKERS or CPU count)")
    ana.add_argument("--out", required=True, help="JSON report path")
    ana.add_argument("--cte-out", default=None,
                     help="CTE matrix CSV path (default: <out>_cte.csv)")

    ben = sub.add_parser("benchmark", help="run a JSON-described grid")
    ben.add_argument("--config", required=True, help="grid JSON path")
    ben.add_argument("--out", required=True,
                     help="output prefix; writes <prefix>.csv and "
                          "<prefix>_realizations.csv")
    ben.add_argument("--realizations", type=int, default=20)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--workers", type=int, default=None)
    return parser


def _cmd_simulate(args, parser) -> int:
    if args.n < 32:
        parser.error("--n must be >= 32")
    if not 0.0 <= args.q <= 1.0:
        parser.error("--q must be in [0, 1]")
    if not 0.0 <= args.alpha <= 0.3:
        parser.error("--alpha must be in [0, 0.3]")
    if args.model == "henon":
        series, truth = henon(args.n, args.q, args.seed)
    else:
        series, truth = nonlinear_ar(args.n, args.seed)
    if args.alpha:
        series = mix(series, args.alpha)
    write_series_csv(series, args.out)
    if args.truth_out:
        write_truth_json(truth, args.truth_out, series.n_channels)
    print(f"wrote {series.n_channels} channels x {series.n_samples} samples "
          f"to {args.out}")
    return 0


def _report_payload(series, config: NueConfig, result, input_path: str) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "input": str(input_path),
        "config": {
            "algorithm": config.algorithm,
            "m": config.m,
            "d": config.d,
            "k_neighbors": config.n_neighbors,
            "lambda": config.lam,
            "gamma": config.gamma,
            "bootstrap_size": config.bootstrap_size,
            "percentile": config.percentile,
            "theiler": config.theiler,
            "max_iterations": config.max_iterations,
            "seed": config.seed,
        },
        "index_base": 0,
        "labels": list(series.labels),
        "cte": [[float(v) for v in row] for row in result.cte],
        "binary": [[int(v) for v in row] for row in result.binary],
        "embeddings": [[[int(c.channel), int(c.lag)] for c in emb]
                       for emb in result.embeddings],
        "iterations": [int(i) for i in result.iterations],
        "sent": [float(v) for v in result.sent],
        "timings": {
            "per_target_seconds": [float(s) for s in result.seconds],
            "total_seconds": result.total_seconds,
        },
    }


def _write_cte_csv(series, result, path) -> None:
    with open(path, "w") as fh:
        fh.write("source," + ",".join(series.labels) + "\n")
        for lab, row in zip(series.labels, result.cte):
            fh.write(lab + "," + ",".join(repr(float(v)) for v in row) + "\n")


def _cmd_analyze(args, parser) -> int:
    if not 0.0 <= args.lam <= 1.0:
        parser.error("--lambda must be in [0, 1]")
    if args.gamma < 0:
        parser.error("--gamma must be >= 0")
    if args.m < 1:
        parser.error("--m must be >= 1")
    if args.d < 1:
        parser.error("--d must be >= 1")
    if args.k_neighbors < 1:
        parser.error("--k-neighbors must be >= 1")
    if args.theiler < 0:
        parser.error("--theiler must be >= 0")
    if args.bootstrap_size < 1:
        parser.error("--bootstrap-size must be >= 1")
    if not 0.0 < args.percentile < 100.0:
        parser.error("--percentile must be in (0, 100)")
    if args.max_iterations is not None and args.max_iterations < 1:
        parser.error("--max-iterations must be >= 1")
    workers = args.workers if args.workers else _default_workers()
    series = read_series_csv(args.input)
    config = NueConfig(algorithm=args.algorithm, m=args.m, d=args.d,
                       n_neighbors=args.k_neighbors, lam=args.lam,
                       gamma=args.gamma, bootstrap_size=args.bootstrap_size,
                       percentile=args.percentile, theiler=args.theiler,
                       max_iterations=args.max_iterations, seed=args.seed)
    t0 = time.perf_counter()
    result = dependency_matrix(series, config, workers=workers)
    dt = time.perf_counter() - t0

    payload = _report_payload(series, config, result, args.input)
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    cte_path = args.cte_out
    if cte_path is None:
        stem = args.out[:-5] if args.out.endswith(".json") else args.out
        cte_path = stem + "_cte.csv"
    _write_cte_csv(series, result, cte_path)

    sent = result.sent
    order = sorted(range(series.n_channels), key=lambda i: -sent[i])
    print(f"analyzed {series.n_channels} channels x {series.n_samples} samples "
          f"in {dt:.1f} s ({args.algorithm}, workers={workers})")
    print(f"detected edges: {int(result.binary.sum())} of "
          f"{series.n_channels * (series.n_channels - 1)} ordered pairs")
    print("top senders (row sums of the CTE matrix, nats):")
    for i in order[:5]:
        print(f"  {series.labels[i]:>12s}  {sent[i]:.4f}")
    print(f"report: {args.out}")
    print(f"cte matrix: {cte_path}")
    return 0


def _cmd_benchmark(args, parser) -> int:
    if args.realizations < 1:
        parser.error("--realizations must be >= 1")
    workers = args.workers if args.workers else _default_workers()
    try:
        spec = load_grid(args.config)
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as e:
        print(f"error: bad grid config: {e}", file=sys.stderr)
        return 3
    result = run_grid(spec, args.realizations, seed=args.seed,
                      workers=workers, progress=print)
    grid_path = args.out + ".csv"
    real_path = args.out + "_realizations.csv"
    write_grid_csv(result.rows, grid_path)
    write_realizations_csv(result.realizations, real_path)
    print(f"wrote {grid_path} ({len(result.rows)} cells) and "
          f"{real_path} ({len(result.realizations)} realizations)")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args, parser)
        if args.command == "analyze":
            return _cmd_analyze(args, parser)
        return _cmd_benchmark(args, parser)
    except CsvFormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except SeriesTooShort as e:
        print(f"error: series too short: {e}", file=sys.stderr)
        return 4
    except EntropyEmbedError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
