"""Synthetic benchmark systems with known coupling structure.

Three generators: a ring of five coupled Henon maps (chaotic, coupling
strength Q), a five-node nonlinear autoregressive network (stochastic),
and an instantaneous mixing transform that blends channels with strength
alpha to mimic zero-lag crosstalk. Each generator returns the series plus
the ground-truth edge set that detection metrics score against.

Channel indices are 0-based everywhere, including exported ground truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data_model import MultivariateSeries
from .errors import Diverged

__all__ = [
    "GroundTruth",
    "henon",
    "nonlinear_ar",
    "mix",
    "write_truth_json",
    "read_truth_json",
]

BURN_IN = 1000
_HENON_LIMIT = 1e6
_HENON_MAX_RESTARTS = 100

# directed coupling template of the 5-node Henon ring (0-based)
_HENON_EDGES = frozenset({(0, 1), (2, 1), (1, 2), (3, 2), (2, 3), (4, 3)})
# directed edges of the nonlinear AR network (0-based)
_AR_EDGES = frozenset({(0, 1), (0, 2), (1, 2), (0, 3), (3, 4)})

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GroundTruth:
    """Set of ordered (source, target) channel pairs that truly couple."""

    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        edges = frozenset((int(s), int(t)) for s, t in self.edges)
        if any(s == t for s, t in edges):
            raise ValueError("ground truth cannot contain self-loops")
        object.__setattr__(self, "edges", edges)

    def has_edge(self, source: int, target: int) -> bool:
        return (source, target) in self.edges


def _labels(L: int) -> tuple[str, ...]:
    return tuple(f"ch{i + 1}" for i in range(L))


def henon(N: int, Q: float, seed) -> tuple[MultivariateSeries, GroundTruth]:
    """Five coupled Henon maps in a chain; returns (series, truth).

    Channels 0 and 4 run autonomously; channels 1-3 couple to both
    neighbors with strength Q. Initial conditions are uniform on [0, 1),
    the first 1000 samples are discarded, and a trajectory that escapes
    past 1e6 restarts from fresh initial conditions (at most 100 times
    before giving up with Diverged). Q = 0 decouples the chain and the
    reported truth is empty.
    """
    if N < 32:
        raise ValueError("N must be >= 32")
    if not 0.0 <= Q <= 1.0:
        raise ValueError("Q must be in [0, 1]")
    rng = np.random.default_rng(seed)
    total = N + BURN_IN
    for _attempt in range(_HENON_MAX_RESTARTS + 1):
        y = np.empty((5, total))
        y[:, :2] = rng.uniform(0.0, 1.0, size=(5, 2))
        ok = True
        for n in range(2, total):
            p1 = y[:, n - 1]
            p2 = y[:, n - 2]
            y[0, n] = 1.4 - p1[0] * p1[0] + 0.3 * p2[0]
            y[4, n] = 1.4 - p1[4] * p1[4] + 0.3 * p2[4]
            for l in (1, 2, 3):
                drive = 0.5 * Q * (p1[l - 1] + p1[l + 1]) + (1.0 - Q) * p1[l]
                y[l, n] = 1.4 - drive * drive + 0.3 * p2[l]
            if np.any(np.abs(y[:, n]) > _HENON_LIMIT):
                ok = False
                break
        if ok:
            series = MultivariateSeries(y[:, BURN_IN:].copy(), _labels(5))
            edges = _HENON_EDGES if Q > 0 else frozenset()
            return series, GroundTruth(edges)
    raise Diverged(
        f"Henon map escaped on {_HENON_MAX_RESTARTS} consecutive restarts"
    )


def nonlinear_ar(N: int, seed, noise_scale: float = 1.0
                 ) -> tuple[MultivariateSeries, GroundTruth]:
    """Five-node nonlinear AR network driven by unit Gaussian innovations.

    Node 0 is a resonant AR(2); nodes 1-3 receive quadratic or linear
    drives from upstream nodes; node 4 is fed by node 3. State starts at
    zero and the first 1000 samples are discarded. noise_scale rescales
    the innovations (0 pins the network at its fixed point; default 1).
    """
    if N < 32:
        raise ValueError("N must be >= 32")
    if noise_scale < 0:
        raise ValueError("noise_scale must be >= 0")
    rng = np.random.default_rng(seed)
    total = N + BURN_IN
    e = rng.standard_normal((5, total)) * noise_scale
    y = np.zeros((5, total))
    a = 0.95 * _SQRT2
    b = 0.25 * _SQRT2
    for n in range(3, total):
        y[0, n] = a * y[0, n - 1] - 0.9125 * y[0, n - 2] + e[0, n]
        y[1, n] = 0.5 * y[0, n - 2] ** 2 + e[1, n]
        y[2, n] = -0.4 * y[0, n - 3] + 0.4 * y[1, n - 1] + e[2, n]
        y[3, n] = -0.5 * y[0, n - 1] ** 2 + b * y[3, n - 1] + e[3, n]
        y[4, n] = -b * y[3, n - 1] + b * y[4, n - 2] + e[4, n]
    series = MultivariateSeries(y[:, BURN_IN:].copy(), _labels(5))
    return series, GroundTruth(_AR_EDGES)


def mix(series: MultivariateSeries, alpha: float) -> MultivariateSeries:
    """Instantaneous linear mixing: every output channel keeps weight
    (1 - alpha) on itself and picks up alpha from each other channel.

    alpha = 0 returns the input values unchanged. Requires 5 channels
    (the benchmark systems' shape).
    """
    if series.n_channels != 5:
        raise ValueError("mix expects a 5-channel series")
    if not 0.0 <= alpha <= 0.3:
        raise ValueError("alpha must be in [0, 0.3]")
    if alpha == 0.0:
        return MultivariateSeries(series.values, series.labels, series.sample_rate)
    L = series.n_channels
    A = np.full((L, L), alpha)
    np.fill_diagonal(A, 1.0 - alpha)
    # samples are columns; A is symmetric so left-multiplication applies
    # the same per-sample blend as the row-vector convention
    mixed = A @ series.values
    return MultivariateSeries(mixed, series.labels, series.sample_rate)


def write_truth_json(truth: GroundTruth, path, n_channels: int = 5) -> None:
    """Export an edge list as JSON (0-based channel indices)."""
    payload = {
        "index_base": 0,
        "n_channels": int(n_channels),
        "edges": sorted([int(s), int(t)] for s, t in truth.edges),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_truth_json(path) -> GroundTruth:
    with open(path) as fh:
        payload = json.load(fh)
    return GroundTruth(frozenset((int(s), int(t)) for s, t in payload["edges"]))
