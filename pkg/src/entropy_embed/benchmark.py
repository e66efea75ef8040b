"""Benchmark grids: generate, analyze, score, aggregate, and time.

A grid is the cross product of data lengths, coupling strengths, mixing
strengths, and algorithm variants. Every realization in a cell draws its
dataset seed from (master seed, model, N, Q, alpha, realization index)
only, so all variants of one cell analyze byte-identical data and their
wall-clock times are comparable. Scoring counts detected edges against
ground truth over all ordered channel pairs.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EntropyEmbedError, ShapeMismatch
from .nue import NueConfig, dependency_matrix
from .simgen import GroundTruth, henon, mix, nonlinear_ar

__all__ = [
    "ConfusionCounts",
    "VariantSpec",
    "GridSpec",
    "BenchmarkRow",
    "RealizationRecord",
    "BenchmarkResult",
    "score",
    "load_grid",
    "run_grid",
    "write_grid_csv",
    "write_realizations_csv",
]

MODELS = ("henon", "ar")

# fixed column order of the aggregate CSV
GRID_COLUMNS = ("algorithm", "model", "N", "Q", "alpha", "lambda", "gamma",
                "acc", "tpr", "tnr", "iterations", "seconds")
REALIZATION_COLUMNS = GRID_COLUMNS + ("realization", "seed", "tp", "tn", "fp", "fn")


@dataclass(frozen=True)
class ConfusionCounts:
    """Edge-detection counts over all ordered channel pairs."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def acc(self) -> float:
        return 100.0 * (self.tp + self.tn) / self.total

    @property
    def tpr(self) -> float:
        pos = self.tp + self.fn
        return 100.0 * self.tp / pos if pos else float("nan")

    @property
    def tnr(self) -> float:
        neg = self.tn + self.fp
        return 100.0 * self.tn / neg if neg else float("nan")


def score(binary, truth: GroundTruth) -> ConfusionCounts:
    """Count TP/TN/FP/FN of a binary detection matrix against ground truth.

    binary[x, y] != 0 means "edge x -> y detected"; the diagonal must be
    zero and every truth edge must name valid channels.
    """
    B = np.asarray(binary)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ShapeMismatch(f"binary must be square, got {B.shape}")
    L = B.shape[0]
    if np.any(np.diagonal(B) != 0):
        raise ShapeMismatch("binary matrix must have a zero diagonal")
    for s, t in truth.edges:
        if not (0 <= s < L and 0 <= t < L):
            raise ShapeMismatch(f"truth edge ({s}, {t}) outside {L} channels")
    detected = B != 0
    actual = np.zeros((L, L), dtype=bool)
    for s, t in truth.edges:
        actual[s, t] = True
    off = ~np.eye(L, dtype=bool)
    tp = int(np.count_nonzero(detected & actual & off))
    tn = int(np.count_nonzero(~detected & ~actual & off))
    fp = int(np.count_nonzero(detected & ~actual & off))
    fn = int(np.count_nonzero(~detected & actual & off))
    return ConfusionCounts(tp, tn, fp, fn)


@dataclass(frozen=True)
class VariantSpec:
    """One algorithm variant of a grid: which driver and its weights."""

    algorithm: str
    lam: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.algorithm not in ("msr", "bootstrap", "la", "aic"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass(frozen=True)
class GridSpec:
    """Cross product of data axes and variants, plus shared tuning."""

    model: str
    n_values: tuple[int, ...]
    q_values: tuple[float, ...] = (0.6,)
    alpha_values: tuple[float, ...] = (0.0,)
    variants: tuple[VariantSpec, ...] = (VariantSpec("msr"),)
    m: int = 1
    d: int = 5
    k_neighbors: int = 10
    theiler: int = 0
    bootstrap_size: int = 100
    percentile: float = 95.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        qs = self.q_values if self.model == "henon" else (None,)
        object.__setattr__(
            self, "q_values",
            tuple(None if q is None else float(q) for q in qs))
        object.__setattr__(self, "alpha_values",
                           tuple(float(a) for a in self.alpha_values))
        object.__setattr__(self, "variants", tuple(self.variants))
        if not self.variants:
            raise ValueError("grid needs at least one variant")

    def cells(self):
        for n in self.n_values:
            for q in self.q_values:
                for alpha in self.alpha_values:
                    for v in self.variants:
                        yield n, q, alpha, v


_GRID_KEYS = {"model", "n_values", "q_values", "alpha_values", "variants",
              "m", "d", "k_neighbors", "theiler", "bootstrap_size", "percentile"}


def load_grid(path) -> GridSpec:
    """Parse a grid description JSON file into a GridSpec."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: grid spec must be a JSON object")
    unknown = set(raw) - _GRID_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown grid keys {sorted(unknown)}")
    if "model" not in raw or "n_values" not in raw:
        raise ValueError(f"{path}: grid spec requires 'model' and 'n_values'")
    variants = []
    for v in raw.get("variants", [{"algorithm": "msr"}]):
        extra = set(v) - {"algorithm", "lambda", "gamma"}
        if extra:
            raise ValueError(f"{path}: unknown variant keys {sorted(extra)}")
        variants.append(VariantSpec(v["algorithm"],
                                    lam=float(v.get("lambda", 1.0)),
                                    gamma=float(v.get("gamma", 0.0))))
    kwargs = {k: raw[k] for k in
              ("m", "d", "k_neighbors", "theiler", "bootstrap_size", "percentile")
              if k in raw}
    return GridSpec(model=raw["model"],
                    n_values=tuple(raw["n_values"]),
                    q_values=tuple(raw.get("q_values", (0.6,))),
                    alpha_values=tuple(raw.get("alpha_values", (0.0,))),
                    variants=tuple(variants),
                    **kwargs)


@dataclass(frozen=True)
class RealizationRecord:
    """One analyzed realization: its cell, counts, and timing."""

    algorithm: str
    model: str
    n: int
    q: float | None
    alpha: float
    lam: float
    gamma: float
    realization: int
    seed: int
    counts: ConfusionCounts
    iterations: int
    seconds: float


@dataclass(frozen=True)
class BenchmarkRow:
    """Per-cell aggregate: mean rates, iterations, and wall-clock time."""

    algorithm: str
    model: str
    n: int
    q: float | None
    alpha: float
    lam: float
    gamma: float
    acc: float
    tpr: float
    tnr: float
    iterations: float
    seconds: float
    realizations: int
    failures: int


@dataclass(frozen=True)
class BenchmarkResult:
    rows: tuple[BenchmarkRow, ...]
    realizations: tuple[RealizationRecord, ...]


def _dataset_seed(master_seed: int, model: str, n: int, q, alpha: float,
                  realization: int) -> np.random.SeedSequence:
    entropy = [
        int(master_seed) % (2 ** 64),
        MODELS.index(model),
        int(n),
        0 if q is None else int(round(float(q) * 1_000_000)),
        int(round(float(alpha) * 1_000_000)),
        int(realization),
    ]
    return np.random.SeedSequence(entropy)


def _generate(model: str, n: int, q, alpha: float, ss: np.random.SeedSequence):
    if model == "henon":
        series, truth = henon(n, q, ss)
    else:
        series, truth = nonlinear_ar(n, ss)
    if alpha:
        series = mix(series, alpha)
    return series, truth


def _run_cell_realization(spec: GridSpec, n: int, q, alpha: float,
                          variant: VariantSpec, master_seed: int,
                          realization: int) -> RealizationRecord:
    ss = _dataset_seed(master_seed, spec.model, n, q, alpha, realization)
    analysis_seed = int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
    series, truth = _generate(spec.model, n, q, alpha, ss.spawn(1)[0])
    config = NueConfig(algorithm=variant.algorithm, m=spec.m, d=spec.d,
                       n_neighbors=spec.k_neighbors, lam=variant.lam,
                       gamma=variant.gamma, bootstrap_size=spec.bootstrap_size,
                       percentile=spec.percentile, theiler=spec.theiler,
                       seed=analysis_seed)
    t0 = time.perf_counter()
    result = dependency_matrix(series, config)
    dt = time.perf_counter() - t0
    counts = score(result.binary, truth)
    return RealizationRecord(
        algorithm=variant.algorithm, model=spec.model, n=n, q=q, alpha=alpha,
        lam=variant.lam, gamma=variant.gamma, realization=realization,
        seed=analysis_seed, counts=counts,
        iterations=int(sum(result.iterations)), seconds=dt)


def run_grid(spec: GridSpec, realizations: int, seed: int = 0,
             workers: int = 1, progress=None) -> BenchmarkResult:
    """Run every grid cell `realizations` times and aggregate.

    Deterministic given seed (timings aside). A realization that raises a
    package error is recorded as a failure and excluded from the means.
    """
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    rows: list[BenchmarkRow] = []
    recs: list[RealizationRecord] = []
    cells = list(spec.cells())
    for ci, (n, q, alpha, variant) in enumerate(cells):
        cell_recs: list[RealizationRecord] = []
        failures = 0
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                futs = [ex.submit(_run_cell_realization, spec, n, q, alpha,
                                  variant, seed, r) for r in range(realizations)]
                for r, fut in enumerate(futs):
                    try:
                        cell_recs.append(fut.result())
                    except EntropyEmbedError as e:
                        failures += 1
                        if progress is not None:
                            progress(f"realization {r} failed: {e}")
        else:
            for r in range(realizations):
                try:
                    cell_recs.append(_run_cell_realization(
                        spec, n, q, alpha, variant, seed, r))
                except EntropyEmbedError as e:
                    failures += 1
                    if progress is not None:
                        progress(f"realization {r} failed: {e}")
        recs.extend(cell_recs)
        if cell_recs:
            accs = [c.counts.acc for c in cell_recs]
            tprs = [c.counts.tpr for c in cell_recs]
            tnrs = [c.counts.tnr for c in cell_recs]
            iters = [c.iterations for c in cell_recs]
            secs = [c.seconds for c in cell_recs]
            row = BenchmarkRow(
                algorithm=variant.algorithm, model=spec.model, n=n, q=q,
                alpha=alpha, lam=variant.lam, gamma=variant.gamma,
                acc=float(np.mean(accs)), tpr=float(np.mean(tprs)),
                tnr=float(np.mean(tnrs)), iterations=float(np.mean(iters)),
                seconds=float(np.mean(secs)),
                realizations=len(cell_recs), failures=failures)
        else:
            row = BenchmarkRow(
                algorithm=variant.algorithm, model=spec.model, n=n, q=q,
                alpha=alpha, lam=variant.lam, gamma=variant.gamma,
                acc=float("nan"), tpr=float("nan"), tnr=float("nan"),
                iterations=float("nan"), seconds=float("nan"),
                realizations=0, failures=failures)
        rows.append(row)
        if progress is not None:
            qtxt = "-" if q is None else f"{q:g}"
            progress(f"cell {ci + 1}/{len(cells)}: {variant.algorithm} "
                     f"N={n} Q={qtxt} alpha={alpha:g} acc={row.acc:.1f}")
    return BenchmarkResult(tuple(rows), tuple(recs))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_grid_csv(rows, path) -> None:
    """Aggregate CSV, one row per grid cell, fixed column order."""
    with open(path, "w") as fh:
        fh.write(",".join(GRID_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in (
                r.algorithm, r.model, r.n, r.q, r.alpha, r.lam, r.gamma,
                r.acc, r.tpr, r.tnr, r.iterations, r.seconds)) + "\n")


def write_realizations_csv(records, path) -> None:
    """Per-realization CSV for variance inspection."""
    with open(path, "w") as fh:
        fh.write(",".join(REALIZATION_COLUMNS) + "\n")
        for r in records:
            c = r.counts
            fh.write(",".join(_fmt(v) for v in (
                r.algorithm, r.model, r.n, r.q, r.alpha, r.lam, r.gamma,
                c.acc, c.tpr, c.tnr, r.iterations, r.seconds,
                r.realization, r.seed, c.tp, c.tn, c.fp, c.fn)) + "\n")
