#!/usr/bin/env python3
"""Accuracy vs series length for the coupled-map benchmark.

Runs the bundled length-sweep grid and prints an ACC/TPR/TNR table; pass
--out to also keep the CSVs.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from entropy_embed.benchmark import load_grid, run_grid, write_grid_csv, write_realizations_csv

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs", "henon_length_sweep.json")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default=None, help="output CSV prefix")
    args = ap.parse_args()

    spec = load_grid(CONFIG)
    result = run_grid(spec, args.realizations, seed=args.seed,
                      workers=args.workers, progress=print)
    print(f"{'N':>6s} {'acc':>7s} {'tpr':>7s} {'tnr':>7s} {'sec':>7s}")
    for row in result.rows:
        print(f"{row.n:>6d} {row.acc:>7.1f} {row.tpr:>7.1f} {row.tnr:>7.1f} "
              f"{row.seconds:>7.2f}")
    if args.out:
        write_grid_csv(result.rows, args.out + ".csv")
        write_realizations_csv(result.realizations, args.out + "_realizations.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
