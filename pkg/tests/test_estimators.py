"""Information estimators: frozen oracle values, analytic targets, identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_embed.data_model import Candidate, EmbeddingState
from entropy_embed.errors import DomainError, NotEnoughNeighbors
from entropy_embed.estimators import (
    CmiWorkspace,
    KsgParams,
    digamma,
    ksg_cmi,
    ksg_cte,
    ksg_mi,
)
from oracles import (
    correlated_pair,
    gaussian_cmi,
    gaussian_mi,
    ref_ksg_cmi,
    ref_ksg_mi,
)

Y8 = np.array([0.0, 1.0, 4.0, 2.0, 7.0, 5.0, 3.0, 6.0])
W8 = np.array([1.0, 0.0, 5.0, 3.0, 6.0, 7.0, 2.0, 4.0])
S8 = np.array([2.0, 1.0, 3.0, 0.0, 7.0, 4.0, 6.0, 5.0])


class TestDigamma:
    def test_known_values(self):
        # psi(1) = -euler_gamma, psi(2) = 1 - euler_gamma
        assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-14)
        assert digamma(2.0) == pytest.approx(1.0 - 0.5772156649015329, abs=1e-14)

    @given(x=st.floats(0.01, 50.0))
    @settings(max_examples=80, deadline=None)
    def test_recurrence(self, x):
        assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            digamma(0.0)
        with pytest.raises(DomainError):
            digamma(np.array([1.0, -2.0]))

    def test_array_form(self):
        out = digamma(np.array([1.0, 2.0, 3.0]))
        assert out.shape == (3,)


class TestFrozenOracleValues:
    """Reference values computed once by the loop-based oracle."""

    def test_mi_small_set(self):
        assert ksg_mi(Y8, W8, KsgParams(2)) == pytest.approx(
            0.8428571428571427, abs=1e-12)
        assert ksg_mi(Y8, W8, KsgParams(3)) == pytest.approx(
            0.6345238095238095, abs=1e-12)

    def test_cmi_small_set(self):
        assert ksg_cmi(Y8, W8, S8, KsgParams(2)) == pytest.approx(
            0.6770833333333333, abs=1e-12)

    def test_mi_matches_oracle_random(self, rng):
        for dim_w in (1, 2):
            y = rng.normal(size=70)
            w = rng.normal(size=(70, dim_w)) + y[:, None]
            got = ksg_mi(y, w, KsgParams(4))
            want = ref_ksg_mi(y, w, 4)
            assert got == pytest.approx(want, abs=1e-10)

    def test_cmi_matches_oracle_random(self, rng):
        y = rng.normal(size=60)
        s = rng.normal(size=(60, 2)) + 0.5 * y[:, None]
        w = rng.normal(size=60) + 0.7 * y
        got = ksg_cmi(y, w, s, KsgParams(5))
        want = ref_ksg_cmi(y, w, s, 5)
        assert got == pytest.approx(want, abs=1e-10)

    def test_cmi_matches_oracle_with_theiler(self, rng):
        y = rng.normal(size=50)
        w = rng.normal(size=50)
        s = rng.normal(size=50)
        params = KsgParams(3, theiler=2)
        assert ksg_cmi(y, w, s, params) == pytest.approx(
            ref_ksg_cmi(y, w, s, 3, theiler=2), abs=1e-10)
        assert ksg_mi(y, w, params) == pytest.approx(
            ref_ksg_mi(y, w, 3, theiler=2), abs=1e-10)


class TestAnalyticTargets:
    def test_gaussian_mi_three_correlations(self, rng):
        for rho in (0.0, 0.5, 0.9):
            errs = []
            for _ in range(5):
                x, y = correlated_pair(rho, 512, rng)
                errs.append(ksg_mi(x, y, KsgParams(10)) - gaussian_mi(rho))
            assert np.mean(np.abs(errs)) <= 0.1

    def test_markov_chain_cmi_near_zero(self, rng):
        # w -> s -> y: conditioned on s, w carries nothing about y
        n = 800
        w = rng.standard_normal(n)
        s = 0.9 * w + np.sqrt(1 - 0.81) * rng.standard_normal(n)
        y = 0.9 * s + np.sqrt(1 - 0.81) * rng.standard_normal(n)
        assert abs(ksg_cmi(y, w, s, KsgParams(10))) <= 0.05

    def test_trivariate_gaussian_cmi(self, rng):
        # y gets independent paths from w and s
        n = 1500
        w = rng.standard_normal(n)
        s = rng.standard_normal(n)
        e = rng.standard_normal(n)
        y = 0.6 * w + 0.6 * s + 0.52915026221291817 * e
        cov = np.array([[1.0, 0.6, 0.6],
                        [0.6, 1.0, 0.0],
                        [0.6, 0.0, 1.0]])
        want = gaussian_cmi(cov)
        got = ksg_cmi(y, w, s, KsgParams(10))
        assert got == pytest.approx(want, abs=0.08)


class TestIdentities:
    def test_empty_conditioning_reduces_to_mi(self, rng):
        y = rng.normal(size=80)
        w = rng.normal(size=80) + y
        params = KsgParams(6)
        mi = ksg_mi(y, w, params)
        assert ksg_cmi(y, w, None, params) == mi
        assert ksg_cmi(y, w, np.zeros((80, 0)), params) == mi

    def test_symmetry(self, rng):
        y = rng.normal(size=120)
        w = rng.normal(size=120) + 0.8 * y
        params = KsgParams(5)
        assert ksg_mi(y, w, params) == pytest.approx(
            ksg_mi(w, y, params), abs=1e-9)

    @given(seed=st.integers(0, 200))
    @settings(max_examples=25, deadline=None)
    def test_joint_row_permutation_exact(self, seed):
        rng = np.random.default_rng(seed)
        n = 50
        y = rng.normal(size=n)
        w = rng.normal(size=n) + 0.5 * y
        s = rng.normal(size=n)
        perm = rng.permutation(n)
        params = KsgParams(4)
        assert ksg_mi(y, w, params) == ksg_mi(y[perm], w[perm], params)
        assert ksg_cmi(y, w, s, params) == ksg_cmi(y[perm], w[perm], s[perm], params)

    def test_negative_estimates_not_clipped(self):
        rng = np.random.default_rng(6)
        y = rng.standard_normal(150)
        w = rng.standard_normal(150)
        assert ksg_mi(y, w, KsgParams(10)) < 0.0


class TestGuards:
    def test_not_enough_rows(self):
        with pytest.raises(NotEnoughNeighbors):
            ksg_mi(np.arange(5.0), np.arange(5.0), KsgParams(10))

    def test_theiler_shrinks_budget(self):
        y = np.arange(12.0)
        with pytest.raises(NotEnoughNeighbors):
            ksg_mi(y, y[::-1], KsgParams(8, theiler=3))

    def test_param_validation(self):
        with pytest.raises(ValueError):
            KsgParams(0)
        with pytest.raises(ValueError):
            KsgParams(5, theiler=-1)

    def test_row_count_mismatch(self, rng):
        with pytest.raises(ValueError):
            ksg_mi(rng.normal(size=30), rng.normal(size=31), KsgParams(3))


class TestCmiWorkspace:
    def test_value_matches_direct_call(self, rng):
        y = rng.normal(size=60)
        s = rng.normal(size=(60, 2))
        w = rng.normal(size=60)
        params = KsgParams(4)
        ws = CmiWorkspace(y, s, params)
        assert ws.value(w) == ksg_cmi(y, w, s, params)

    def test_empty_conditioning_value_matches_mi(self, rng):
        y = rng.normal(size=60)
        w = rng.normal(size=60)
        params = KsgParams(4)
        ws = CmiWorkspace(y, None, params)
        assert ws.value(w) == ksg_mi(y, w, params)

    def test_shuffled_matches_direct_on_permuted(self, rng):
        y = rng.normal(size=50)
        s = rng.normal(size=(50, 1))
        w = rng.normal(size=50)
        params = KsgParams(3)
        ws = CmiWorkspace(y, s, params)
        yp = y[rng.permutation(50)]
        wp = w[rng.permutation(50)]
        assert ws.value_shuffled(yp, wp) == ksg_cmi(yp, wp, s, params)

    def test_identity_shuffle_equals_value(self, rng):
        y = rng.normal(size=40)
        w = rng.normal(size=40)
        ws = CmiWorkspace(y, rng.normal(size=(40, 2)), KsgParams(3))
        assert ws.value_shuffled(y, w) == ws.value(w)


class TestCte:
    def _embedding(self, cols, cands):
        return EmbeddingState(tuple(cands), np.column_stack(cols))

    def test_absent_source_is_exactly_zero(self, rng):
        y = rng.normal(size=60)
        emb = self._embedding(
            [rng.normal(size=60), rng.normal(size=60)],
            [Candidate(1, 1), Candidate(2, 3)])
        assert ksg_cte(y, emb, source=0, params=KsgParams(4)) == 0.0

    def test_splits_blocks_like_cmi(self, rng):
        y = rng.normal(size=70)
        c0 = rng.normal(size=70)
        c1 = rng.normal(size=70) + y
        c2 = rng.normal(size=70)
        emb = self._embedding([c0, c1, c2],
                              [Candidate(0, 1), Candidate(1, 2), Candidate(0, 3)])
        params = KsgParams(5)
        want = ksg_cmi(y, np.column_stack([c0, c2]), c1[:, None], params)
        assert ksg_cte(y, emb, source=0, params=params) == want

    def test_all_columns_from_source(self, rng):
        y = rng.normal(size=50)
        c0 = rng.normal(size=50) + 0.5 * y
        c1 = rng.normal(size=50)
        emb = self._embedding([c0, c1], [Candidate(3, 1), Candidate(3, 2)])
        params = KsgParams(4)
        want = ksg_mi(y, np.column_stack([c0, c1]), params)
        assert ksg_cte(y, emb, source=3, params=params) == want

    def test_empty_embedding_rejected(self):
        emb = EmbeddingState.empty(20)
        with pytest.raises(ValueError):
            ksg_cte(np.zeros(20), emb, 0, KsgParams(2))
