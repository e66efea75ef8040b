#!/usr/bin/env python3
"""Wall-clock comparison of the selection algorithms on one benchmark system.

Times full dependency-matrix runs for prediction-only selection (lambda=1),
blended selection (lambda=0), and the bootstrap scheme on identical
coupled-map realizations.
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from entropy_embed.nue import NueConfig, dependency_matrix
from entropy_embed.simgen import henon

VARIANTS = (
    ("msr lambda=1", dict(algorithm="msr", lam=1.0)),
    ("msr lambda=0", dict(algorithm="msr", lam=0.0)),
    ("bootstrap", dict(algorithm="bootstrap")),
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--q", type=float, default=0.6)
    ap.add_argument("--realizations", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    datasets = [henon(args.n, args.q, args.seed + r)[0]
                for r in range(args.realizations)]
    print(f"{'variant':>14s} {'sec/run':>9s}")
    for name, kw in VARIANTS:
        config = NueConfig(d=5, m=1, n_neighbors=10, seed=args.seed, **kw)
        t0 = time.perf_counter()
        for series in datasets:
            dependency_matrix(series, config, workers=1)
        dt = (time.perf_counter() - t0) / args.realizations
        print(f"{name:>14s} {dt:>9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
