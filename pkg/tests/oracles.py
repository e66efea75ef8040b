"""Independent reference implementations used as test oracles.

Everything here is written in the most obvious way possible: per-point
python loops, explicit sorting on (distance, index) tuples, textbook
formulas. No code is shared with the package beyond scipy's digamma.
"""

import numpy as np
from scipy.special import digamma


def _pair_dist(a, b, metric):
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    if metric == "max":
        return float(d.max())
    return float(np.sqrt((d * d).sum()))


def brute_knn_row(points, i, T, theiler=0, metric="euclidean"):
    """T nearest admissible neighbors of row i, smaller-index tie-break."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    pairs = []
    for j in range(n):
        if abs(i - j) <= theiler:
            continue
        pairs.append((_pair_dist(pts[i], pts[j], metric), j))
    pairs.sort()
    if len(pairs) < T:
        raise ValueError("not enough admissible neighbors")
    idx = [j for _, j in pairs[:T]]
    return np.array(idx), pairs[T - 1][0]


def brute_range_count(points, i, radius, theiler=0, metric="euclidean"):
    """Admissible rows strictly closer than radius to row i."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    count = 0
    for j in range(n):
        if abs(i - j) <= theiler:
            continue
        if _pair_dist(pts[i], pts[j], metric) < radius:
            count += 1
    return count


def brute_all_neighbors(points, T, theiler=0, metric="euclidean"):
    """Every row's T nearest admissible neighbors from a full distance matrix.

    Returns (indices, kth_distance) with rows ordered by (distance, index),
    matching brute_knn_row on each row but vectorized enough to sweep many
    instances.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    diff = np.abs(pts[:, None, :] - pts[None, :, :])
    if metric == "max":
        D = diff.max(axis=2)
    else:
        D = np.sqrt((diff ** 2).sum(axis=2))
    off = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    D[off <= theiler] = np.inf
    index_grid = np.broadcast_to(np.arange(n), (n, n))
    order = np.lexsort((index_grid, D), axis=1)
    idx = order[:, :T]
    kth = np.take_along_axis(D, idx[:, -1:], axis=1).ravel()
    return idx, kth


def _joint_rows(*blocks):
    cols = []
    for b in blocks:
        arr = np.asarray(b, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        cols.append(arr)
    return np.hstack(cols)


def ref_ksg_mi(y, w, T, theiler=0):
    """Reference MI estimate: per-point loops, strict marginal counts."""
    yb = _joint_rows(y)
    wb = _joint_rows(w)
    joint = _joint_rows(yb, wb)
    n = joint.shape[0]
    terms = []
    for i in range(n):
        dists = sorted(
            _pair_dist(joint[i], joint[j], "max")
            for j in range(n) if abs(i - j) > theiler
        )
        eps = dists[T - 1]
        n_y = brute_range_count(yb, i, eps, theiler, "max")
        n_w = brute_range_count(wb, i, eps, theiler, "max")
        terms.append(digamma(n_w + 1) + digamma(n_y + 1))
    return float(digamma(T) + digamma(n) - np.mean(terms))


def ref_ksg_cmi(y, w, s, T, theiler=0):
    """Reference conditional MI estimate; s may be None for plain MI."""
    if s is None:
        return ref_ksg_mi(y, w, T, theiler)
    yb = _joint_rows(y)
    wb = _joint_rows(w)
    sb = _joint_rows(s)
    joint = _joint_rows(yb, wb, sb)
    ys = _joint_rows(yb, sb)
    ws = _joint_rows(wb, sb)
    n = joint.shape[0]
    terms = []
    for i in range(n):
        dists = sorted(
            _pair_dist(joint[i], joint[j], "max")
            for j in range(n) if abs(i - j) > theiler
        )
        eps = dists[T - 1]
        n_s = brute_range_count(sb, i, eps, theiler, "max")
        n_ws = brute_range_count(ws, i, eps, theiler, "max")
        n_ys = brute_range_count(ys, i, eps, theiler, "max")
        terms.append(digamma(n_s + 1) - digamma(n_ws + 1) - digamma(n_ys + 1))
    return float(digamma(T) + np.mean(terms))


def ref_msr(y, u, T, theiler=0):
    """Reference leave-one-out nearest-neighbor regression residual."""
    y = np.asarray(y, dtype=float).ravel()
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    n = y.shape[0]
    sq = 0.0
    for i in range(n):
        idx, _ = brute_knn_row(u, i, T, theiler, "euclidean")
        r = y[i] - y[idx].mean()
        sq += r * r
    return sq / n


def ref_kde_predict_and_aic(y, u):
    """Reference Nadaraya-Watson fit via an explicit inverse covariance.

    Returns (predictions, aic). Double loop, Mahalanobis form through
    np.linalg.inv, self-weights included.
    """
    y = np.asarray(y, dtype=float).ravel()
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    n, d = u.shape
    cov = np.cov(u, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov) + 1e-10 * np.eye(d)
    inv = np.linalg.inv(cov)
    h = 1.5 * (1.0 / (d + 2)) ** (1.0 / (d + 4)) * n ** (-1.0 / (d + 4))
    norm = (np.sqrt(2.0 * np.pi) * h) ** (-d)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            diff = u[i] - u[j]
            q = float(diff @ inv @ diff)
            K[i, j] = norm * np.exp(-q / (2.0 * h * h))
    pred = np.array([(K[i] @ y) / K[i].sum() for i in range(n)])
    resid = y - pred
    ms = float(np.mean(resid * resid))
    p = float(sum(K[i, i] / K[i].sum() for i in range(n)))
    aic = n * np.log(ms) + 2.0 * p
    return pred, float(aic)


def gaussian_mi(rho):
    """Analytic MI of a bivariate normal with correlation rho (nats)."""
    return -0.5 * np.log(1.0 - rho * rho)


def gaussian_cmi(cov):
    """Analytic I(Y; W | S) of a trivariate normal, variables in order
    (y, w, s); cov is the 3x3 covariance matrix."""
    C = np.asarray(cov, dtype=float)
    det = np.linalg.det
    c_ys = det(C[np.ix_([0, 2], [0, 2])])
    c_ws = det(C[np.ix_([1, 2], [1, 2])])
    return float(0.5 * np.log(c_ys * c_ws / (C[2, 2] * det(C))))


def correlated_pair(rho, n, rng):
    """Draw n samples of a standard bivariate normal with correlation rho."""
    x = rng.standard_normal(n)
    z = rng.standard_normal(n)
    y = rho * x + np.sqrt(1.0 - rho * rho) * z
    return x, y
