"""k-NN (digamma-based) estimators of MI, conditional MI, and conditional TE.

All estimates are in nats. The estimator follows the classic k-nearest-
neighbor construction: in the joint space, find each point's T-th neighbor
under the maximum norm; that distance is the strict counting radius for
every marginal subspace, and the estimate combines digamma values of the
counts. Negative estimates are returned as-is, never clipped, because the
greedy selection compares values and clipping would distort the argmax.

The conditional form is

    I(Y; W | S) = psi(T) + < psi(N_S + 1) - psi(N_[W,S] + 1) - psi(N_[Y,S] + 1) >

and with an empty conditioning set the plain-MI form replaces the
< psi(N_S + 1) > term by psi(N):

    I(Y; W) = psi(T) + psi(N) - < psi(N_W + 1) + psi(N_Y + 1) >.

Per-point averages use math.fsum, so estimates are invariant under joint
row permutation of the inputs (exact, theiler = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma as _scipy_digamma

from .data_model import EmbeddingState
from .errors import DomainError, NotEnoughNeighbors
from .neighbors import (
    abs_diff_matrix,
    band_inplace,
    kth_value_rows,
    maxnorm_distance_matrix,
    min_admissible,
    strict_count_rows,
)

__all__ = ["KsgParams", "digamma", "ksg_mi", "ksg_cmi", "ksg_cte", "CmiWorkspace"]


@dataclass(frozen=True)
class KsgParams:
    """Estimator tuning: neighbor count T and Theiler exclusion window."""

    n_neighbors: int = 10
    theiler: int = 0

    def __post_init__(self):
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if self.theiler < 0:
            raise ValueError("theiler must be >= 0")


def digamma(x):
    """Digamma function, domain x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0):
        raise DomainError("digamma requires x > 0")
    out = _scipy_digamma(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def _psi(counts: np.ndarray) -> np.ndarray:
    # counts are >= 0 integers; +1 keeps the argument positive
    return _scipy_digamma(counts + 1.0)


def _as_cols(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a vector or 2-D matrix")
    return arr


def _fmean(terms: np.ndarray) -> float:
    # fsum makes the average independent of row order
    return math.fsum(terms.tolist()) / len(terms)


def _check_rows(n: int, params: KsgParams) -> None:
    if min_admissible(n, params.theiler) < params.n_neighbors:
        raise NotEnoughNeighbors(
            f"N={n} with theiler={params.theiler} cannot support "
            f"T={params.n_neighbors} joint-space neighbors"
        )


def _mi_from_D(D_y: np.ndarray, D_w: np.ndarray, T: int) -> float:
    """Plain-MI combination from banded marginal distance matrices."""
    n = D_y.shape[0]
    joint = np.maximum(D_y, D_w)
    eps = kth_value_rows(joint, T)
    n_y = strict_count_rows(D_y, eps)
    n_w = strict_count_rows(D_w, eps)
    terms = _psi(n_w) + _psi(n_y)
    return float(_scipy_digamma(T) + _scipy_digamma(n) - _fmean(terms))


def _cmi_from_D(D_s: np.ndarray, D_sy: np.ndarray, D_w: np.ndarray, T: int) -> float:
    """Conditional-MI combination; D_s and D_sy are banded, D_w need not be."""
    joint = np.maximum(D_sy, D_w)
    eps = kth_value_rows(joint, T)
    n_s = strict_count_rows(D_s, eps)
    n_ws = strict_count_rows(np.maximum(D_s, D_w), eps)
    n_ys = strict_count_rows(D_sy, eps)
    terms = _psi(n_s) - _psi(n_ws) - _psi(n_ys)
    return float(_scipy_digamma(T) + _fmean(terms))


class CmiWorkspace:
    """Re-usable evaluator of I(Y; W | S) for a fixed target and conditioning set.

    Builds the banded conditioning-set distance matrix once; each candidate
    then costs one marginal distance matrix plus counts. The greedy drivers
    and the permutation-surrogate test both lean on this cache.
    """

    def __init__(self, y, s_matrix, params: KsgParams):
        y = np.asarray(y, dtype=np.float64).ravel()
        self.n = y.shape[0]
        self.params = params
        _check_rows(self.n, params)
        s = None if s_matrix is None else _as_cols(s_matrix, "s_matrix")
        if s is not None and s.shape[1] == 0:
            s = None
        if s is not None and s.shape[0] != self.n:
            raise ValueError("y and s_matrix row counts differ")
        self._y = y
        if s is None:
            self.D_s = None
            self.D_y = band_inplace(abs_diff_matrix(y), params.theiler)
        else:
            self.D_s = band_inplace(maxnorm_distance_matrix(s), params.theiler)
            self.D_sy = np.maximum(self.D_s, abs_diff_matrix(y))

    def value(self, w_col) -> float:
        """I(Y; W | S) for one candidate column."""
        w = np.asarray(w_col, dtype=np.float64).ravel()
        if w.shape[0] != self.n:
            raise ValueError("candidate column has wrong length")
        D_w = abs_diff_matrix(w)
        if self.D_s is None:
            return _mi_from_D(self.D_y, band_inplace(D_w, self.params.theiler),
                              self.params.n_neighbors)
        return _cmi_from_D(self.D_s, self.D_sy, D_w, self.params.n_neighbors)

    def value_shuffled(self, y_perm, w_perm) -> float:
        """Same estimate with surrogate (row-permuted) target and candidate.

        The conditioning set stays in original row order, so its cached
        distance matrix is reused across all surrogates.
        """
        yp = np.asarray(y_perm, dtype=np.float64).ravel()
        wp = np.asarray(w_perm, dtype=np.float64).ravel()
        if yp.shape[0] != self.n or wp.shape[0] != self.n:
            raise ValueError("surrogate vectors have wrong length")
        th = self.params.theiler
        T = self.params.n_neighbors
        D_wp = abs_diff_matrix(wp)
        if self.D_s is None:
            return _mi_from_D(band_inplace(abs_diff_matrix(yp), th),
                              band_inplace(D_wp, th), T)
        D_syp = np.maximum(self.D_s, abs_diff_matrix(yp))
        return _cmi_from_D(self.D_s, D_syp, D_wp, T)


def ksg_mi(y, w, params: KsgParams) -> float:
    """Mutual information I(Y; W) in nats; w may have several columns."""
    y = np.asarray(y, dtype=np.float64).ravel()
    w = _as_cols(w, "w")
    if w.shape[0] != y.shape[0]:
        raise ValueError("y and w row counts differ")
    _check_rows(y.shape[0], params)
    D_y = band_inplace(abs_diff_matrix(y), params.theiler)
    D_w = band_inplace(maxnorm_distance_matrix(w), params.theiler)
    return _mi_from_D(D_y, D_w, params.n_neighbors)


def ksg_cmi(y, w, s, params: KsgParams) -> float:
    """Conditional mutual information I(Y; W | S) in nats.

    s may be None or have zero columns, in which case this is exactly
    ksg_mi(y, w). Both w and s may have several columns.
    """
    s_arr = None if s is None else _as_cols(s, "s")
    if s_arr is None or s_arr.shape[1] == 0:
        return ksg_mi(y, w, params)
    y = np.asarray(y, dtype=np.float64).ravel()
    w = _as_cols(w, "w")
    if w.shape[0] != y.shape[0] or s_arr.shape[0] != y.shape[0]:
        raise ValueError("y, w, s row counts differ")
    _check_rows(y.shape[0], params)
    D_s = band_inplace(maxnorm_distance_matrix(s_arr), params.theiler)
    D_sy = np.maximum(D_s, abs_diff_matrix(y))
    D_w = maxnorm_distance_matrix(w)
    return _cmi_from_D(D_s, D_sy, D_w, params.n_neighbors)


def ksg_cte(target, embedding: EmbeddingState, source: int, params: KsgParams) -> float:
    """Conditional transfer entropy from `source` into the embedded target.

    The embedding's columns split into the source's lagged components (the
    W block) and everything else (the conditioning block). When the
    embedding holds no lag of the source the flow is structurally absent
    and the value is exactly 0.0.
    """
    if embedding.dim == 0:
        raise ValueError("embedding must contain at least one candidate")
    mask = np.array([c.channel == source for c in embedding.selected])
    if not mask.any():
        return 0.0
    cols = embedding.realizations
    w = cols[:, mask]
    s = cols[:, ~mask]
    return ksg_cmi(target, w, s if s.shape[1] else None, params)
