"""Time-series storage, normalization, candidate pools, and lagged matrices.

Everything downstream (estimators, prediction scores, embedding drivers)
works on the objects defined here: a channels-by-samples record, (channel,
lag) candidates, and the aligned realization matrices built from them.
All samples before index d*m are discarded so every lagged column shares
one index frame.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConstantChannel, CsvFormatError, SeriesTooShort

__all__ = [
    "MultivariateSeries",
    "Candidate",
    "EmbeddingState",
    "normalize",
    "build_candidate_pool",
    "lagged_matrix",
    "read_series_csv",
    "write_series_csv",
]

# Channels with sample variance below this are treated as constant.
VARIANCE_FLOOR = 1e-30


@dataclass(frozen=True, eq=False)
class MultivariateSeries:
    """L channels x N samples of real-valued data with unique labels.

    values are coerced to a read-only float64 array. ``sample_rate`` is
    optional metadata (Hz) and plays no role in the analysis itself.
    """

    values: np.ndarray
    labels: tuple[str, ...]
    sample_rate: float | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, order="C")
        if vals.ndim != 2:
            raise ValueError(f"values must be 2-D (channels x samples), got ndim={vals.ndim}")
        L, N = vals.shape
        if L < 2:
            raise ValueError(f"need at least 2 channels, got {L}")
        if N < 1:
            raise ValueError("need at least 1 sample")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must all be finite")
        labels = tuple(str(x) for x in self.labels)
        if len(labels) != L:
            raise ValueError(f"got {len(labels)} labels for {L} channels")
        if len(set(labels)) != L:
            raise ValueError("labels must be unique")
        if self.sample_rate is not None and not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive when given")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "labels", labels)

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def channel(self, i: int) -> np.ndarray:
        return self.values[i]


class Candidate(NamedTuple):
    """One lagged variable: channel index plus positive lag in samples."""

    channel: int
    lag: int


@dataclass(frozen=True, eq=False)
class EmbeddingState:
    """Ordered selected candidates plus their aligned realization matrix.

    ``realizations`` has one column per selected candidate, N_eff rows;
    column j holds the source channel of selected[j] shifted by its lag.
    """

    selected: tuple[Candidate, ...]
    realizations: np.ndarray

    def __post_init__(self):
        sel = tuple(self.selected)
        if len(set(sel)) != len(sel):
            raise ValueError("duplicate candidate in embedding")
        real = np.array(self.realizations, dtype=np.float64, order="F")
        if real.ndim != 2:
            raise ValueError("realizations must be 2-D")
        if real.shape[1] != len(sel):
            raise ValueError(
                f"realizations has {real.shape[1]} columns for {len(sel)} candidates"
            )
        real.setflags(write=False)
        object.__setattr__(self, "selected", sel)
        object.__setattr__(self, "realizations", real)

    @classmethod
    def empty(cls, n_eff: int) -> "EmbeddingState":
        return cls(selected=(), realizations=np.zeros((n_eff, 0)))

    def extended(self, candidate: Candidate, column: np.ndarray) -> "EmbeddingState":
        column = np.asarray(column, dtype=np.float64)
        if column.shape != (self.realizations.shape[0],):
            raise ValueError("column length does not match embedding rows")
        new = np.column_stack([self.realizations, column])
        return EmbeddingState(self.selected + (Candidate(*candidate),), new)

    @property
    def dim(self) -> int:
        return len(self.selected)

    @property
    def n_eff(self) -> int:
        return self.realizations.shape[0]


def normalize(series: MultivariateSeries) -> MultivariateSeries:
    """Rescale every channel to zero mean and unit sample variance (N-1).

    Raises ConstantChannel if any channel's variance is below 1e-30.
    Idempotent up to floating-point roundoff.
    """
    vals = series.values
    mean = vals.mean(axis=1, keepdims=True)
    var = vals.var(axis=1, ddof=1, keepdims=True)
    bad = np.flatnonzero(var.ravel() < VARIANCE_FLOOR)
    if bad.size:
        raise ConstantChannel(
            f"channel {series.labels[bad[0]]!r} has variance {var.ravel()[bad[0]]:.3e}"
        )
    out = (vals - mean) / np.sqrt(var)
    return MultivariateSeries(out, series.labels, series.sample_rate)


def build_candidate_pool(L: int, m: int, d: int) -> list[Candidate]:
    """All L*d candidates: for each channel, lags m, 2m, ..., d*m.

    Order is channel-major, lag ascending, and depends only on (L, m, d).
    """
    if L < 2:
        raise ValueError("need at least 2 channels")
    if m < 1 or d < 1:
        raise ValueError("m and d must be >= 1")
    return [Candidate(ch, j * m) for ch in range(L) for j in range(1, d + 1)]


def lagged_matrix(
    series: MultivariateSeries,
    candidates: Sequence[Candidate],
    target: int,
    m: int,
    d: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Target vector and candidate realization matrix on the shared frame.

    The first d*m samples are dropped: target_vector[i] = series[target][i + d*m]
    and column c of the matrix holds series[ch_c][i + d*m - lag_c]. Raises
    SeriesTooShort when nothing remains.
    """
    if not 0 <= target < series.n_channels:
        raise ValueError(f"target {target} out of range")
    depth = d * m
    N = series.n_samples
    if N <= depth:
        raise SeriesTooShort(f"N={N} leaves no samples after dropping d*m={depth}")
    n_eff = N - depth
    vals = series.values
    y = np.array(vals[target, depth:], dtype=np.float64)
    matrix = np.empty((n_eff, len(candidates)), dtype=np.float64, order="F")
    for c, (ch, lag) in enumerate(candidates):
        if not 0 <= ch < series.n_channels:
            raise ValueError(f"candidate channel {ch} out of range")
        if not 1 <= lag <= depth:
            raise ValueError(f"candidate lag {lag} outside [1, {depth}]")
        matrix[:, c] = vals[ch, depth - lag : depth - lag + n_eff]
    return y, matrix


def read_series_csv(path) -> MultivariateSeries:
    """Read a series CSV: label header row, then one time sample per row."""
    try:
        fh = open(path, newline="")
    except OSError as e:
        raise CsvFormatError(f"cannot open {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        labels = [h.strip() for h in header]
        if any(not lab for lab in labels):
            raise CsvFormatError(f"{path}: empty label in header")
        if len(labels) < 2:
            raise CsvFormatError(f"{path}: need at least 2 channels, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise CsvFormatError(f"{path}: duplicate channel labels")
        L = len(labels)
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != L:
                raise CsvFormatError(
                    f"{path}: line {lineno}: expected {L} fields, got {len(row)}"
                )
            try:
                rows.append([float(x) for x in row])
            except ValueError as e:
                raise CsvFormatError(f"{path}: line {lineno}: {e}") from None
        if not rows:
            raise CsvFormatError(f"{path}: no data rows")
    values = np.array(rows, dtype=np.float64).T
    try:
        return MultivariateSeries(values, tuple(labels))
    except ValueError as e:
        raise CsvFormatError(f"{path}: {e}") from None


def write_series_csv(series: MultivariateSeries, path) -> None:
    """Write the ingestion CSV format: labels row, then one sample per row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(series.labels)
        # repr round-trips float64 exactly; cast because numpy scalars
        # stringify with a type prefix under numpy >= 2
        for col in series.values.T:
            writer.writerow([repr(float(v)) for v in col])
