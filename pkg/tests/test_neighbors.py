"""Neighbor queries: oracle agreement, engine equivalence, tie handling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_embed.errors import NotEnoughNeighbors
from entropy_embed.neighbors import (
    NeighborIndex,
    band_inplace,
    bulk_knn,
    jitter,
    kth_value_rows,
    maxnorm_distance_matrix,
    min_admissible,
    sq_euclidean_matrix,
    strict_count_rows,
)
from oracles import brute_knn_row, brute_range_count


def random_points(rng, n=None, dim=None, quantize=False):
    n = n or int(rng.integers(16, 80))
    dim = dim or int(rng.integers(1, 7))
    pts = rng.normal(size=(n, dim))
    if quantize:
        # coarse grid forces many exact distance ties
        pts = np.round(pts * 2.0) / 2.0
    return pts


class TestDistanceMatrices:
    def test_maxnorm_matches_pairwise(self, rng):
        pts = random_points(rng, n=30, dim=3)
        D = maxnorm_distance_matrix(pts)
        for i in range(30):
            for j in range(30):
                assert D[i, j] == np.abs(pts[i] - pts[j]).max()

    def test_sq_euclidean_matches_pairwise(self, rng):
        pts = random_points(rng, n=25, dim=4)
        D = sq_euclidean_matrix(pts)
        expect = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        np.testing.assert_allclose(D, expect, rtol=1e-12)

    def test_band_excludes_window(self):
        D = np.zeros((6, 6))
        band_inplace(D, 2)
        for i in range(6):
            for j in range(6):
                assert np.isinf(D[i, j]) == (abs(i - j) <= 2)

    def test_kth_and_strict_count(self):
        D = np.array([[np.inf, 1.0, 2.0, 3.0],
                      [1.0, np.inf, 5.0, 0.5],
                      [2.0, 5.0, np.inf, 4.0],
                      [3.0, 0.5, 4.0, np.inf]])
        kth = kth_value_rows(D, 2)
        np.testing.assert_array_equal(kth, [2.0, 1.0, 4.0, 3.0])
        counts = strict_count_rows(D, kth)
        np.testing.assert_array_equal(counts, [1, 1, 1, 1])


class TestMinAdmissible:
    @given(n=st.integers(1, 60), theiler=st.integers(0, 8))
    @settings(max_examples=60, deadline=None)
    def test_matches_per_point_enumeration(self, n, theiler):
        counts = []
        for i in range(n):
            counts.append(sum(1 for j in range(n)
                              if j != i and abs(i - j) > theiler))
        assert min_admissible(n, theiler) == min(counts)


class TestBulkKnnOracle:
    @pytest.mark.parametrize("metric", ["euclidean", "max"])
    @pytest.mark.parametrize("theiler", [0, 1, 4])
    def test_both_engines_match_brute_force(self, metric, theiler, rng):
        for trial in range(8):
            pts = random_points(rng, quantize=(trial % 2 == 0))
            n = pts.shape[0]
            T = int(rng.integers(1, 8))
            if min_admissible(n, theiler) < T:
                continue
            lin_i, lin_d = bulk_knn(pts, T, theiler, metric, engine="linear")
            kdt_i, kdt_d = bulk_knn(pts, T, theiler, metric, engine="kdtree")
            for i in range(n):
                ref_i, ref_d = brute_knn_row(pts, i, T, theiler, metric)
                assert sorted(lin_i[i]) == sorted(ref_i), f"row {i} linear"
                assert sorted(kdt_i[i]) == sorted(ref_i), f"row {i} kdtree"
                assert lin_d[i] == pytest.approx(ref_d, rel=1e-12, abs=1e-12)
                assert kdt_d[i] == pytest.approx(ref_d, rel=1e-12, abs=1e-12)

    def test_tie_break_prefers_smaller_index(self):
        # three coincident points: neighbors of each are the two others,
        # and both engines must list them in index order
        pts = np.zeros((5, 2))
        pts[3] = [5.0, 5.0]
        pts[4] = [9.0, 9.0]
        for engine in ("linear", "kdtree"):
            idx, kth = bulk_knn(pts, 2, 0, "euclidean", engine=engine)
            assert set(idx[0]) == {1, 2}
            assert set(idx[1]) == {0, 2}
            assert set(idx[2]) == {0, 1}
            assert kth[0] == 0.0

    def test_sqrt_collapsed_ties_agree_across_engines(self, rng):
        # thirds land off the binary float grid, so squared sums carry
        # noise that the square root collapses back into exact ties; the
        # engines must still resolve those boundary rows identically
        for trial in range(3):
            pts = np.round(rng.normal(size=(450, 6)) * 1.5) / 1.5
            T, theiler = 8, 4
            lin_i, lin_d = bulk_knn(pts, T, theiler, "euclidean", engine="linear")
            kdt_i, kdt_d = bulk_knn(pts, T, theiler, "euclidean", engine="kdtree")
            np.testing.assert_array_equal(np.sort(lin_i, axis=1),
                                          np.sort(kdt_i, axis=1))
            np.testing.assert_allclose(kdt_d, lin_d, rtol=1e-12, atol=0.0)
            for i in map(int, rng.integers(0, 450, size=12)):
                ref_i, ref_d = brute_knn_row(pts, i, T, theiler, "euclidean")
                assert sorted(lin_i[i]) == sorted(ref_i), f"trial {trial} row {i}"
                assert lin_d[i] == ref_d

    def test_not_enough_neighbors(self):
        pts = np.arange(6.0)[:, None]
        with pytest.raises(NotEnoughNeighbors):
            bulk_knn(pts, 3, theiler=2, metric="euclidean")

    def test_kdtree_shortfall_rows_fall_back(self, rng):
        # theiler band wide enough that edge rows need the exact scan
        pts = random_points(rng, n=20, dim=2)
        T = 5
        theiler = 4
        lin_i, _ = bulk_knn(pts, T, theiler, "euclidean", engine="linear")
        kdt_i, _ = bulk_knn(pts, T, theiler, "euclidean", engine="kdtree")
        for i in range(20):
            assert sorted(lin_i[i]) == sorted(kdt_i[i])


class TestNeighborIndex:
    def test_matches_brute_per_row(self, rng):
        pts = random_points(rng, n=40, dim=2)
        ni = NeighborIndex(pts, metric="max", theiler=1)
        for i in (0, 7, 39):
            idx, dist = ni.knn(i, 4)
            ref_i, ref_d = brute_knn_row(pts, i, 4, 1, "max")
            np.testing.assert_array_equal(idx, ref_i)
            assert dist == pytest.approx(ref_d)

    def test_knn_distance_non_decreasing_in_T(self, rng):
        pts = random_points(rng, n=50, dim=3)
        ni = NeighborIndex(pts, metric="euclidean")
        dists = [ni.knn(11, T)[1] for T in range(1, 10)]
        assert all(b >= a for a, b in zip(dists, dists[1:]))

    def test_range_count_just_under_kth_distance(self, rng):
        # strictly-less-than semantics: shrinking the T-th distance by a
        # hair can cover at most T-1 points
        for _ in range(20):
            pts = random_points(rng)
            ni = NeighborIndex(pts, metric="max")
            i = int(rng.integers(0, pts.shape[0]))
            T = int(rng.integers(1, 6))
            _, dist = ni.knn(i, T)
            if dist == 0.0:
                continue
            assert ni.range_count(i, dist * (1.0 - 1e-12)) <= T - 1

    def test_range_count_matches_brute(self, rng):
        pts = random_points(rng, n=35, dim=2, quantize=True)
        ni = NeighborIndex(pts, metric="max", theiler=2)
        for i in (0, 10, 34):
            for radius in (0.25, 0.5, 1.0, 2.0):
                assert ni.range_count(i, radius) == brute_range_count(
                    pts, i, radius, 2, "max")

    def test_raises_when_too_few(self):
        ni = NeighborIndex(np.arange(4.0)[:, None], theiler=1)
        with pytest.raises(NotEnoughNeighbors):
            ni.knn(1, 3)


class TestJitter:
    def test_deterministic(self, rng):
        pts = rng.normal(size=(20, 3))
        a = jitter(pts, 1e-6, seed=42)
        b = jitter(pts, 1e-6, seed=42)
        assert np.array_equal(a, b)
        c = jitter(pts, 1e-6, seed=43)
        assert not np.array_equal(a, c)

    def test_zero_amplitude_is_identity(self, rng):
        pts = rng.normal(size=(10, 2))
        assert np.array_equal(jitter(pts, 0.0, seed=1), pts)

    def test_amplitude_bounds_displacement(self, rng):
        pts = rng.normal(size=(50, 4))
        amp = np.array([1e-3, 1e-6, 0.0, 1e-1])
        out = jitter(pts, amp, seed=7)
        delta = np.abs(out - pts)
        assert np.all(delta <= amp[None, :])
        assert np.all(delta[:, 2] == 0.0)

    def test_rejects_negative_amplitude(self, rng):
        with pytest.raises(ValueError):
            jitter(rng.normal(size=(5, 2)), -1e-3, seed=0)
