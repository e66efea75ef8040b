"""Greedy non-uniform embedding drivers and per-target dependency analysis.

Four variants share one loop: pick the best remaining (channel, lag)
candidate, run that variant's termination test, append on success, stop on
failure. They differ in the selection score (conditional MI, its
low-dimensional approximation, or an MSR/CMI blend) and in the stop rule
(permutation surrogates, AIC comparison, or a minimum-MSR-improvement
threshold gamma).

`dependency_matrix` runs the loop once per target channel and converts the
selected embeddings into an L x L conditional-transfer-entropy matrix plus
a binary significance matrix: an edge x -> y exists iff target y's
embedding kept at least one lag of channel x.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data_model import (
    Candidate,
    EmbeddingState,
    MultivariateSeries,
    build_candidate_pool,
    lagged_matrix,
    normalize,
)
from .errors import EmptyPool
from .estimators import CmiWorkspace, KsgParams, ksg_cmi, ksg_cte, ksg_mi
from .neighbors import jitter
from .prediction import MsrWorkspace, aic_score, msr as msr_score

__all__ = [
    "NueConfig",
    "IterationRecord",
    "NueTrace",
    "CandidatePool",
    "TerminationDecision",
    "DependencyResult",
    "select_cmi",
    "select_la",
    "select_msr",
    "bootstrap_terminate",
    "aic_terminate",
    "msr_terminate",
    "run_nue",
    "dependency_matrix",
]

ALGORITHMS = ("msr", "bootstrap", "la", "aic")

# relative amplitude of the tie-breaking noise added once per run to the
# estimator inputs (never to the stored embeddings)
JITTER_SCALE = 1e-10

# normalized targets have unit variance, so the empty embedding predicts
# the mean and its MSR is var(y) = 1
BASELINE_MSR = 1.0


@dataclass(frozen=True)
class NueConfig:
    """Algorithm variant plus every tuning parameter of one analysis run."""

    algorithm: str = "msr"
    m: int = 1
    d: int = 5
    n_neighbors: int = 10
    lam: float = 1.0
    gamma: float = 0.0
    bootstrap_size: int = 100
    percentile: float = 95.0
    theiler: int = 0
    max_iterations: int | None = None
    seed: int = 0
    aic_accept_on_increase: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.m < 1 or self.d < 1:
            raise ValueError("m and d must be >= 1")
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda weight must be in [0, 1]")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.bootstrap_size < 1:
            raise ValueError("bootstrap_size must be >= 1")
        if not 0.0 < self.percentile < 100.0:
            raise ValueError("percentile must be in (0, 100)")
        if self.theiler < 0:
            raise ValueError("theiler must be >= 0")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1 when given")

    @property
    def ksg_params(self) -> KsgParams:
        return KsgParams(self.n_neighbors, self.theiler)


@dataclass(frozen=True)
class IterationRecord:
    """One greedy iteration: the chosen candidate, its selection score,
    the termination-test value, and whether it was accepted."""

    candidate: Candidate
    score: float
    test_value: float
    accepted: bool


@dataclass(frozen=True, eq=False)
class NueTrace:
    """Full record of one greedy run. The embedding holds the accepted
    prefix of the per-iteration candidates; a trailing rejected record
    (if any) marks the iteration that triggered the stop."""

    records: tuple[IterationRecord, ...]
    embedding: EmbeddingState
    baseline_msr: float | None = None

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclass(frozen=True, eq=False)
class CandidatePool:
    """The candidate set with its realization columns.

    `matrix` holds the exact lagged values; `ksg_matrix` is the copy handed
    to the information estimators (tie-broken by jitter in the drivers; by
    default the same array).
    """

    candidates: tuple[Candidate, ...]
    matrix: np.ndarray
    ksg_matrix: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        cands = tuple(Candidate(*c) for c in self.candidates)
        if len(set(cands)) != len(cands):
            raise ValueError("duplicate candidates in pool")
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[1] != len(cands):
            raise ValueError("matrix must have one column per candidate")
        kmat = self.ksg_matrix
        kmat = mat if kmat is None else np.asarray(kmat, dtype=np.float64)
        if kmat.shape != mat.shape:
            raise ValueError("ksg_matrix shape differs from matrix")
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "ksg_matrix", kmat)
        object.__setattr__(self, "_pos", {c: i for i, c in enumerate(cands)})

    @classmethod
    def from_series(cls, series: MultivariateSeries, target: int, m: int, d: int):
        """Build the full L*d pool for one target; returns (y, pool)."""
        cands = build_candidate_pool(series.n_channels, m, d)
        y, mat = lagged_matrix(series, cands, target, m, d)
        return y, cls(tuple(cands), mat)

    @property
    def n_eff(self) -> int:
        return self.matrix.shape[0]

    def position(self, candidate: Candidate) -> int:
        try:
            return self._pos[Candidate(*candidate)]
        except KeyError:
            raise ValueError(f"candidate {candidate} not in pool") from None

    def positions(self, candidates) -> list[int]:
        return [self.position(c) for c in candidates]

    def remaining(self, state: EmbeddingState) -> list[int]:
        taken = set(self.positions(state.selected))
        return [i for i in range(len(self.candidates)) if i not in taken]

    def column(self, candidate: Candidate) -> np.ndarray:
        return self.matrix[:, self.position(candidate)]

    def ksg_column(self, candidate: Candidate) -> np.ndarray:
        return self.ksg_matrix[:, self.position(candidate)]

    def selected_matrix(self, state: EmbeddingState) -> np.ndarray:
        return self.matrix[:, self.positions(state.selected)]

    def ksg_selected(self, state: EmbeddingState) -> np.ndarray:
        return self.ksg_matrix[:, self.positions(state.selected)]


@dataclass(frozen=True)
class TerminationDecision:
    """Outcome of a termination test; truthiness == keep going."""

    go: bool
    value: float
    threshold: float

    def __bool__(self) -> bool:
        return self.go


def _remaining_or_raise(pool: CandidatePool, state: EmbeddingState) -> list[int]:
    rem = pool.remaining(state)
    if not rem:
        raise EmptyPool("no unselected candidates remain")
    return rem


def select_cmi(y, pool: CandidatePool, state: EmbeddingState, params: KsgParams):
    """Candidate maximizing I(Y; W | selected); ties go to pool order."""
    rem = _remaining_or_raise(pool, state)
    ws = CmiWorkspace(y, pool.ksg_selected(state), params)
    scores = np.array([ws.value(pool.ksg_matrix[:, p]) for p in rem])
    b = int(np.argmax(scores))
    return pool.candidates[rem[b]], float(scores[b])


def select_la(y, pool: CandidatePool, state: EmbeddingState, params: KsgParams,
              cache: dict | None = None):
    """Candidate maximizing the low-dimensional CMI approximation.

    score(W) = I(W;Y) - (2/k) sum_j I(W;W_j) + (2/k) sum_j I(W;W_j|Y) over
    the k already-selected W_j; both sums are defined as 0 when nothing has
    been selected yet (the score is then plain MI). `cache` memoizes the
    pairwise terms across iterations of one run.
    """
    rem = _remaining_or_raise(pool, state)
    sel = pool.positions(state.selected)
    if cache is None:
        cache = {}
    y_col = np.asarray(y, dtype=np.float64).ravel()
    scores = []
    for p in rem:
        w = pool.ksg_matrix[:, p]
        key = ("miy", p)
        if key not in cache:
            cache[key] = ksg_mi(y_col, w, params)
        score = cache[key]
        if sel:
            red = 0.0
            syn = 0.0
            for j in sel:
                wj = pool.ksg_matrix[:, j]
                kr = ("mi", p, j)
                if kr not in cache:
                    cache[kr] = ksg_mi(w, wj, params)
                red += cache[kr]
                kc = ("cmi", p, j)
                if kc not in cache:
                    cache[kc] = ksg_cmi(w, wj, y_col[:, None], params)
                syn += cache[kc]
            score = score - (2.0 / len(sel)) * red + (2.0 / len(sel)) * syn
        scores.append(score)
    scores = np.array(scores)
    b = int(np.argmax(scores))
    return pool.candidates[rem[b]], float(scores[b])


def select_msr(y, pool: CandidatePool, state: EmbeddingState, params: KsgParams,
               lam: float):
    """Candidate maximizing (1-lam)*CMI - lam*MSR; returns the winner's MSR too.

    lam=0 reduces to select_cmi's argmax; lam=1 ranks purely by prediction
    error and never evaluates the information estimator.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda weight must be in [0, 1]")
    rem = _remaining_or_raise(pool, state)
    msrs = None
    if lam > 0.0:
        mw = MsrWorkspace(y, pool.selected_matrix(state),
                          params.n_neighbors, params.theiler)
        msrs = np.array([mw.score(pool.matrix[:, p]) for p in rem])
    if lam < 1.0:
        cw = CmiWorkspace(y, pool.ksg_selected(state), params)
        cmis = np.array([cw.value(pool.ksg_matrix[:, p]) for p in rem])
        scores = (1.0 - lam) * cmis if msrs is None else (1.0 - lam) * cmis - lam * msrs
    else:
        scores = -msrs
    b = int(np.argmax(scores))
    if msrs is not None:
        msr_best = float(msrs[b])
    else:
        u = np.column_stack([pool.selected_matrix(state),
                             pool.matrix[:, rem[b]]])
        msr_best = msr_score(y, u, params.n_neighbors, params.theiler).msr
    return pool.candidates[rem[b]], float(scores[b]), msr_best


def _conditioning_matrix(state_or_matrix, n: int):
    if state_or_matrix is None:
        return None
    if isinstance(state_or_matrix, EmbeddingState):
        mat = state_or_matrix.realizations
    else:
        mat = np.asarray(state_or_matrix, dtype=np.float64)
        if mat.ndim == 1:
            mat = mat[:, None]
    if mat.shape[1] == 0:
        return None
    if mat.shape[0] != n:
        raise ValueError("conditioning rows do not match y")
    return mat


def bootstrap_terminate(y, w_best, state, params: KsgParams, rng,
                        bootstrap_size: int = 100, percentile: float = 95.0,
                        value: float | None = None) -> TerminationDecision:
    """Permutation-surrogate test of the selected candidate's CMI.

    Draws `bootstrap_size` surrogate estimates by independently permuting
    the rows of y and of w_best (the conditioning set keeps its row order),
    takes the given percentile, and keeps going iff the actual estimate
    exceeds it. `state` may be an EmbeddingState, a matrix, or None;
    `value` lets callers pass the already-computed actual estimate.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    w = np.asarray(w_best, dtype=np.float64).ravel()
    s = _conditioning_matrix(state, y.shape[0])
    ws = CmiWorkspace(y, s, params)
    if value is None:
        value = ws.value(w)
    n = y.shape[0]
    scores = np.empty(bootstrap_size)
    for b in range(bootstrap_size):
        yp = y[rng.permutation(n)]
        wp = w[rng.permutation(n)]
        scores[b] = ws.value_shuffled(yp, wp)
    thr = float(np.percentile(scores, percentile))
    return TerminationDecision(bool(value > thr), float(value), thr)


def _la_score_terms(y, w, sel_cols, params: KsgParams) -> float:
    score = ksg_mi(y, w, params)
    k = sel_cols.shape[1]
    if k:
        red = sum(ksg_mi(w, sel_cols[:, j], params) for j in range(k))
        syn = sum(ksg_cmi(w, sel_cols[:, j], y[:, None], params) for j in range(k))
        score = score - (2.0 / k) * red + (2.0 / k) * syn
    return score


def la_terminate(y, w_best, state, params: KsgParams, rng,
                 bootstrap_size: int = 100, percentile: float = 95.0,
                 value: float | None = None,
                 sel_cols: np.ndarray | None = None) -> TerminationDecision:
    """Surrogate test for the LA variant: surrogates rescore the LA
    objective with shuffled (y, w), the selected columns unshuffled."""
    y = np.asarray(y, dtype=np.float64).ravel()
    w = np.asarray(w_best, dtype=np.float64).ravel()
    if sel_cols is None:
        s = _conditioning_matrix(state, y.shape[0])
        sel_cols = np.zeros((y.shape[0], 0)) if s is None else s
    if value is None:
        value = _la_score_terms(y, w, sel_cols, params)
    n = y.shape[0]
    scores = np.empty(bootstrap_size)
    for b in range(bootstrap_size):
        yp = y[rng.permutation(n)]
        wp = w[rng.permutation(n)]
        scores[b] = _la_score_terms(yp, wp, sel_cols, params)
    thr = float(np.percentile(scores, percentile))
    return TerminationDecision(bool(value > thr), float(value), thr)


def _realization_cols(state_or_matrix) -> np.ndarray:
    if isinstance(state_or_matrix, EmbeddingState):
        return state_or_matrix.realizations
    mat = np.asarray(state_or_matrix, dtype=np.float64)
    return mat[:, None] if mat.ndim == 1 else mat


def aic_terminate(y, state_k, state_k_minus_1, *, accept_on_increase: bool = False,
                  score_k: float | None = None,
                  score_prev: float | None = None) -> TerminationDecision:
    """Compare the AIC of the grown embedding against the previous one.

    Default keeps the candidate iff AIC strictly decreased;
    accept_on_increase flips the inequality. Growing by zero columns is
    always a stop. Applies from the second iteration (the previous state
    must be nonempty).
    """
    u_k = _realization_cols(state_k)
    u_p = _realization_cols(state_k_minus_1)
    if u_p.shape[1] == 0:
        raise ValueError("aic_terminate applies from the second iteration")
    if score_prev is None:
        score_prev = aic_score(y, u_p)
    if u_k.shape[1] == u_p.shape[1]:
        return TerminationDecision(False, float(score_prev), float(score_prev))
    if score_k is None:
        score_k = aic_score(y, u_k)
    go = score_k > score_prev if accept_on_increase else score_k < score_prev
    return TerminationDecision(bool(go), float(score_k), float(score_prev))


def msr_terminate(msr_prev: float, msr_new: float, gamma: float) -> bool:
    """Keep going iff the MSR improvement strictly exceeds gamma."""
    if msr_prev < 0 or msr_new < 0:
        raise ValueError("MSR values must be >= 0")
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return (msr_prev - msr_new) > gamma


def _prepare_target(series: MultivariateSeries, target: int, config: NueConfig):
    """Normalize, lag, and tie-break one target's candidate pool.

    Returns (y_raw, y_ksg, pool, bootstrap_seed). The estimator inputs get
    one dose of uniform noise at 1e-10 of each column's spread, derived
    deterministically from (seed, target); stored embeddings keep exact
    lagged values.
    """
    series_n = normalize(series)
    cands = build_candidate_pool(series_n.n_channels, config.m, config.d)
    y, mat = lagged_matrix(series_n, cands, target, config.m, config.d)
    ss = np.random.SeedSequence([config.seed % (2 ** 64), target])
    jit_ss, boot_ss = ss.spawn(2)
    combined = np.column_stack([y, mat])
    amp = JITTER_SCALE * combined.std(axis=0)
    combined_j = jitter(combined, amp, jit_ss)
    pool = CandidatePool(tuple(cands), mat, np.asfortranarray(combined_j[:, 1:]))
    return y, combined_j[:, 0], pool, boot_ss


def _drive(y_ksg, pool: CandidatePool, config: NueConfig, boot_ss) -> NueTrace:
    params = config.ksg_params
    rng = np.random.default_rng(boot_ss)
    max_iter = config.max_iterations or len(pool.candidates)
    state = EmbeddingState.empty(pool.n_eff)
    records: list[IterationRecord] = []
    msr_prev = BASELINE_MSR
    aic_prev: float | None = None
    la_cache: dict = {}

    while len(records) < max_iter and pool.remaining(state):
        first = state.dim == 0
        if config.algorithm == "msr":
            cand, score, msr_best = select_msr(y_ksg, pool, state, params, config.lam)
            test_value = msr_prev - msr_best
            accepted = True if first else msr_terminate(msr_prev, msr_best, config.gamma)
            if accepted:
                msr_prev = msr_best
        elif config.algorithm == "bootstrap":
            cand, score = select_cmi(y_ksg, pool, state, params)
            dec = bootstrap_terminate(
                y_ksg, pool.ksg_column(cand), pool.ksg_selected(state), params,
                rng, config.bootstrap_size, config.percentile, value=score)
            accepted, test_value = dec.go, dec.threshold
        elif config.algorithm == "la":
            cand, score = select_la(y_ksg, pool, state, params, cache=la_cache)
            dec = la_terminate(
                y_ksg, pool.ksg_column(cand), None, params, rng,
                config.bootstrap_size, config.percentile, value=score,
                sel_cols=pool.ksg_selected(state))
            accepted, test_value = dec.go, dec.threshold
        else:  # aic
            cand, score = select_cmi(y_ksg, pool, state, params)
            u_k = np.column_stack([pool.ksg_selected(state), pool.ksg_column(cand)])
            aic_k = aic_score(y_ksg, u_k)
            if first:
                accepted = True
            elif config.aic_accept_on_increase:
                accepted = aic_k > aic_prev
            else:
                accepted = aic_k < aic_prev
            test_value = aic_k
            if accepted:
                aic_prev = aic_k
        records.append(IterationRecord(cand, float(score), float(test_value),
                                       bool(accepted)))
        if not accepted:
            break
        state = state.extended(cand, pool.column(cand))

    baseline = BASELINE_MSR if config.algorithm == "msr" else None
    return NueTrace(tuple(records), state, baseline_msr=baseline)


def run_nue(series: MultivariateSeries, target: int, config: NueConfig) -> NueTrace:
    """One full greedy embedding run for one target channel.

    Deterministic given (series, config.seed): the tie-breaking noise and
    the surrogate permutations all derive from (seed, target).
    """
    _, y_ksg, pool, boot_ss = _prepare_target(series, target, config)
    return _drive(y_ksg, pool, config, boot_ss)


@dataclass(frozen=True, eq=False)
class DependencyResult:
    """Directed-dependency estimate for every ordered channel pair.

    cte[x, y] is the conditional transfer entropy from channel x into
    target y (rows drive columns); binary[x, y] flags whether target y's
    embedding kept any lag of x. Diagonals are zero by construction.
    """

    labels: tuple[str, ...]
    cte: np.ndarray
    binary: np.ndarray
    traces: tuple[NueTrace, ...]
    seconds: tuple[float, ...]

    def __post_init__(self):
        cte = np.asarray(self.cte, dtype=np.float64)
        binary = np.asarray(self.binary, dtype=np.int64)
        cte.setflags(write=False)
        binary.setflags(write=False)
        object.__setattr__(self, "cte", cte)
        object.__setattr__(self, "binary", binary)

    @property
    def embeddings(self) -> tuple[tuple[Candidate, ...], ...]:
        return tuple(t.embedding.selected for t in self.traces)

    @property
    def iterations(self) -> tuple[int, ...]:
        return tuple(t.iterations for t in self.traces)

    @property
    def total_seconds(self) -> float:
        return float(sum(self.seconds))

    @property
    def sent(self) -> np.ndarray:
        """Information sent per channel: row sums of the CTE matrix."""
        return self.cte.sum(axis=1)


def _analyze_target(series: MultivariateSeries, target: int, config: NueConfig):
    """run_nue plus the CTE column for one target; returns (trace, cte_col, dt)."""
    t0 = time.perf_counter()
    _, y_ksg, pool, boot_ss = _prepare_target(series, target, config)
    trace = _drive(y_ksg, pool, config, boot_ss)
    L = series.n_channels
    cte_col = np.zeros(L)
    if trace.embedding.dim:
        # estimators see the same tie-broken columns the selection used
        state_j = EmbeddingState(trace.embedding.selected,
                                 pool.ksg_selected(trace.embedding))
        for x in range(L):
            if x != target:
                cte_col[x] = ksg_cte(y_ksg, state_j, x, config.ksg_params)
    return trace, cte_col, time.perf_counter() - t0


def dependency_matrix(series: MultivariateSeries, config: NueConfig,
                      workers: int = 1, progress=None) -> DependencyResult:
    """Embeddings, CTE matrix, and significance matrix for all targets.

    workers > 1 spreads targets over processes; results are identical to
    the serial run because each target's randomness is derived from
    (seed, target) alone.
    """
    L = series.n_channels
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_analyze_target, [series] * L, range(L),
                                  [config] * L))
    else:
        results = []
        for t in range(L):
            results.append(_analyze_target(series, t, config))
            if progress is not None:
                progress(f"target {t + 1}/{L} done")
    cte = np.zeros((L, L))
    binary = np.zeros((L, L), dtype=np.int64)
    traces = []
    seconds = []
    for t, (trace, cte_col, dt) in enumerate(results):
        chans = {c.channel for c in trace.embedding.selected}
        for x in range(L):
            if x != t and x in chans:
                binary[x, t] = 1
        cte[:, t] = cte_col
        traces.append(trace)
        seconds.append(dt)
    return DependencyResult(series.labels, cte, binary, tuple(traces),
                            tuple(seconds))
