"""Target-prediction scores used for candidate ranking and termination.

Two regressors live here. The nearest-neighbor one predicts each target
sample as the average of the targets at the T Euclidean-nearest embedding
rows (leave-one-out: a row never participates in its own prediction, and
Theiler neighbors are excluded too); its mean squared residual is the MSR
score driving the fast greedy variant. The kernel one is Nadaraya-Watson
regression with a Gaussian kernel over Mahalanobis distances, feeding the
AIC termination rule; there self-weights are part of the definition, so
no exclusion happens.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateResidual, SingularCovariance
from .neighbors import (
    band_inplace,
    bulk_knn,
    sq_euclidean_matrix,
    _topT_from_matrix,
    min_admissible,
)
from .errors import NotEnoughNeighbors

__all__ = ["PredictionScore", "nn_predict", "msr", "MsrWorkspace", "kde_predict", "aic_score"]

# ridge added to the sample covariance diagonal before inverting
_COV_RIDGE = 1e-10
_COND_LIMIT = 1e12

# same crossover as the neighbor engines: tree queries win at low dim
_KDTREE_MAX_DIM = 6


@dataclass(frozen=True, eq=False)
class PredictionScore:
    """MSR plus the residual vector it was computed from."""

    msr: float
    residuals: np.ndarray


def _validate_xy(y, u):
    y = np.asarray(y, dtype=np.float64).ravel()
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 1:
        u = u[:, None]
    if u.ndim != 2 or u.shape[1] < 1:
        raise ValueError("u must have at least one column")
    if u.shape[0] != y.shape[0]:
        raise ValueError("y and u row counts differ")
    return y, u


def nn_predict(y, u, T: int, theiler: int = 0) -> np.ndarray:
    """Leave-one-out T-nearest-neighbor regression of y on the rows of u."""
    y, u = _validate_xy(y, u)
    idx, _ = bulk_knn(u, T, theiler=theiler, metric="euclidean", engine="auto")
    return y[idx].mean(axis=1)


def msr(y, u, T: int, theiler: int = 0) -> PredictionScore:
    """Mean squared residual of the NN prediction (the greedy MSR score)."""
    y, u = _validate_xy(y, u)
    pred = nn_predict(y, u, T, theiler)
    r = y - pred
    return PredictionScore(msr=float(np.mean(r * r)), residuals=r)


class MsrWorkspace:
    """MSR of [S, w] for one fixed conditioning block S and many candidates w.

    Picks the neighbor engine from the total column count: tree queries up
    to 6 columns, a cached squared-distance matrix above (only the
    candidate's own term is recomputed per call). Both give exact results.
    """

    def __init__(self, y, s_matrix, T: int, theiler: int = 0):
        y = np.asarray(y, dtype=np.float64).ravel()
        s = np.asarray(s_matrix, dtype=np.float64)
        if s.ndim == 1:
            s = s[:, None]
        if s.shape[0] != y.shape[0]:
            raise ValueError("y and s_matrix row counts differ")
        n = y.shape[0]
        if min_admissible(n, theiler) < T:
            raise NotEnoughNeighbors(
                f"N={n} with theiler={theiler} cannot support T={T} neighbors"
            )
        self._y = y
        self._s = s
        self._T = T
        self._theiler = theiler
        dim = s.shape[1] + 1
        self._engine = "kdtree" if dim <= _KDTREE_MAX_DIM else "linear"
        if self._engine == "linear":
            self._D2s = band_inplace(
                sq_euclidean_matrix(s) if s.shape[1] else np.zeros((n, n)), theiler
            )

    def score(self, w_col) -> float:
        w = np.asarray(w_col, dtype=np.float64).ravel()
        if w.shape[0] != self._y.shape[0]:
            raise ValueError("candidate column has wrong length")
        if self._engine == "kdtree":
            pts = np.column_stack([self._s, w])
            idx, _ = bulk_knn(pts, self._T, theiler=self._theiler,
                              metric="euclidean", engine="kdtree")
        else:
            d = w[:, None] - w[None, :]
            D = self._D2s + d * d
            np.sqrt(D, out=D)  # tie-breaks follow true distances everywhere
            idx, _ = _topT_from_matrix(D, self._T)
        pred = self._y[idx].mean(axis=1)
        r = self._y - pred
        return float(np.mean(r * r))


def _kde_weights(u: np.ndarray):
    """Gaussian-kernel weight matrix over Mahalanobis distances.

    Returns (K, k_self) where K[i, j] = K_h(u_i, u_j) including j = i and
    k_self is the common diagonal value. Bandwidth follows the unit-variance
    rule h = 1.5 * (1/(d+2))^(1/(d+4)) * N^(-1/(d+4)).
    """
    n, d = u.shape
    cov = np.cov(u, rowvar=False, ddof=1)
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    cov = cov + _COV_RIDGE * np.eye(d)
    if np.linalg.cond(cov) > _COND_LIMIT:
        raise SingularCovariance(
            f"covariance condition number exceeds {_COND_LIMIT:.0e}"
        )
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as e:
        raise SingularCovariance(f"covariance not positive definite: {e}") from e
    z = solve_triangular(L, u.T, lower=True).T
    q = sq_euclidean_matrix(z)  # Mahalanobis quadratic form, no square root
    h = 1.5 * (1.0 / (d + 2)) ** (1.0 / (d + 4)) * n ** (-1.0 / (d + 4))
    k_self = (np.sqrt(2.0 * np.pi) * h) ** (-d)
    K = k_self * np.exp(-q / (2.0 * h * h))
    return K, k_self


def kde_predict(y, u) -> np.ndarray:
    """Nadaraya-Watson regression of y on the rows of u (self included)."""
    y, u = _validate_xy(y, u)
    if u.shape[0] == 1:
        return y.copy()
    K, _ = _kde_weights(u)
    return (K @ y) / K.sum(axis=1)


def aic_score(y, u) -> float:
    """AIC of the KDE regression: N*ln(mean squared residual) + 2p.

    p is the effective number of parameters, the summed share of each
    point's own kernel weight in its row: p = sum_i K(u_i,u_i) / sum_j K(u_i,u_j),
    which always lies in (0, N].
    """
    y, u = _validate_xy(y, u)
    n = u.shape[0]
    if n == 1:
        raise DegenerateResidual("single-point fit has zero residual")
    K, k_self = _kde_weights(u)
    row_sums = K.sum(axis=1)
    pred = (K @ y) / row_sums
    r = y - pred
    ms = float(np.mean(r * r))
    if ms < 1e-300:
        raise DegenerateResidual("mean squared KDE residual is zero")
    p = float(k_self * np.sum(1.0 / row_sums))
    return float(n * np.log(ms) + 2.0 * p)
