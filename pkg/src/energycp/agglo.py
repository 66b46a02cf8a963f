"""Time-ordered agglomerative segmentation (E-Agglomerative).

Starting from an initial contiguous clustering, adjacent clusters are
merged greedily so as to keep the goodness-of-fit (the sum of scaled
divergences between neighbouring clusters) as high as possible. The fit
is recorded at every level and the best level is returned.

Every cluster that can ever form is a run ``[a, b]`` of initial clusters,
so cross and within distance sums for any cluster come from a 2-D prefix
sum over the initial cluster-to-cluster sums in O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .energy import (
    TIE_TOL,
    as_series,
    check_alpha,
    distance_matrix,
    scaled_from_sums,
)
from .errors import InvalidInputError
from .partition import Partition


@dataclass(frozen=True)
class MergeStep:
    left: int
    right: int
    gof: float


@dataclass
class MergeTrace:
    """Outcome of :func:`e_agglo`.

    ``steps[i]`` merges clusters ``left`` and ``right`` (1-based positions
    in the clustering just before the merge); its ``gof`` is the fit after
    the merge, which is 0 for the final single cluster. ``gof`` lists the
    fit for ``n, n-1, ..., 2`` clusters.
    """

    initial: Partition
    steps: List[MergeStep]
    gof: List[float]
    best_k: int
    best_partition: Partition
    partitions: List[Partition]

    @property
    def change_points(self) -> List[int]:
        """Reported change points.

        A trace whose fit is never positive carries no evidence of any
        difference between clusters, so nothing is reported even though
        ``best_partition`` keeps the initial clustering.
        """
        if max(self.gof) <= TIE_TOL:
            return []
        return list(self.best_partition.boundaries)


def equal_width_init(T: int, width: int) -> Partition:
    """Initial clustering of ``1..T`` into consecutive blocks of ``width``.

    A short remainder is folded into the last block.
    """
    if width < 2:
        raise InvalidInputError(f"initial cluster width must be >= 2, got {width}")
    if T < 2 * width:
        raise InvalidInputError(f"T={T} is too short for two clusters of width {width}")
    cps = list(range(width, T, width))
    if T - cps[-1] < width:
        cps.pop()
    return Partition(tuple(cps), T)


def _check_init(init: Partition, T: int) -> Partition:
    if init.T != T:
        raise InvalidInputError(f"initial clustering covers {init.T} points, series has {T}")
    if init.n_clusters < 2:
        raise InvalidInputError("initial clustering needs at least 2 clusters")
    if min(init.sizes()) < 2:
        raise InvalidInputError("every initial cluster needs at least 2 observations")
    return init


def _require_pairs(partition: Partition):
    if min(partition.sizes()) < 2:
        raise InvalidInputError("every cluster needs at least 2 observations")


def goodness_of_fit(series, partition: Partition, alpha=1.0) -> float:
    """Sum of scaled divergences between time-adjacent clusters."""
    X = as_series(series)
    alpha = check_alpha(alpha)
    if partition.T != X.shape[0]:
        raise InvalidInputError(f"partition covers {partition.T} points, series has {X.shape[0]}")
    if partition.n_clusters < 2:
        raise InvalidInputError("goodness of fit needs at least 2 clusters")
    _require_pairs(partition)
    D = distance_matrix(X, alpha)
    segs = [(s - 1, e) for s, e in partition.segments()]
    total = 0.0
    for (a0, a1), (b0, b1) in zip(segs[:-1], segs[1:]):
        between = D[a0:a1, b0:b1].sum()
        wa = np.triu(D[a0:a1, a0:a1], 1).sum()
        wb = np.triu(D[b0:b1, b0:b1], 1).sum()
        total += scaled_from_sums(between, wa, wb, a1 - a0, b1 - b0)
    return total


class _RunSums:
    """O(1) distance sums for runs of initial clusters."""

    def __init__(self, D: np.ndarray, init: Partition):
        segs = [(s - 1, e) for s, e in init.segments()]
        n = len(segs)
        G = np.zeros((n, n))
        within = np.zeros(n)
        for i, (a0, a1) in enumerate(segs):
            within[i] = np.triu(D[a0:a1, a0:a1], 1).sum()
            for j in range(i + 1, n):
                b0, b1 = segs[j]
                G[i, j] = G[j, i] = D[a0:a1, b0:b1].sum()
        self.P = np.zeros((n + 1, n + 1))
        self.P[1:, 1:] = G.cumsum(0).cumsum(1)
        self.W = np.concatenate([[0.0], np.cumsum(within)])
        self.N = np.concatenate([[0], np.cumsum(init.sizes())])

    def block(self, a, b, c, e):
        """Sum of cross sums between initial runs ``[a, b)`` and ``[c, e)``."""
        P = self.P
        return P[b, e] - P[a, e] - P[b, c] + P[a, c]

    def size(self, a, b):
        return int(self.N[b] - self.N[a])

    def within(self, a, b):
        return self.W[b] - self.W[a] + self.block(a, b, a, b) / 2.0

    def q(self, left, right):
        (a, b), (c, e) = left, right
        return scaled_from_sums(
            self.block(a, b, c, e), self.within(a, b), self.within(c, e),
            self.size(a, b), self.size(c, e),
        )


def e_agglo(series, init: Partition, alpha=1.0) -> MergeTrace:
    """Greedy adjacent merging with goodness-of-fit model selection.

    Parameters
    ----------
    series : array_like
        ``(T, d)`` observations in time order.
    init : Partition
        Initial clustering; at least 2 clusters, each of size >= 2.
    alpha : float
        Distance exponent in ``(0, 2)``.

    Returns
    -------
    MergeTrace
        Ties between candidate merges go to the leftmost pair; ties for the
        best level go to the one with more clusters.
    """
    X = as_series(series)
    alpha = check_alpha(alpha)
    init = _check_init(init, X.shape[0])
    sums = _RunSums(distance_matrix(X, alpha), init)
    n = init.n_clusters
    edges = (0,) + init.boundaries + (init.T,)
    runs: List[Tuple[int, int]] = [(i, i + 1) for i in range(n)]
    adj = [sums.q(runs[i], runs[i + 1]) for i in range(n - 1)]
    fit = sum(adj)
    gof = [fit]
    partitions = [init]
    steps: List[MergeStep] = []
    while len(runs) > 1:
        best_j, best_fit = -1, -np.inf
        for j in range(len(runs) - 1):
            merged = (runs[j][0], runs[j + 1][1])
            new = fit - adj[j]
            if j > 0:
                new += sums.q(runs[j - 1], merged) - adj[j - 1]
            if j + 2 < len(runs):
                new += sums.q(merged, runs[j + 2]) - adj[j + 1]
            if new > best_fit + TIE_TOL:
                best_j, best_fit = j, new
        j = best_j
        merged = (runs[j][0], runs[j + 1][1])
        new_adj = adj[:max(j - 1, 0)]
        if j > 0:
            new_adj.append(sums.q(runs[j - 1], merged))
        if j + 2 < len(runs):
            new_adj.append(sums.q(merged, runs[j + 2]))
        new_adj.extend(adj[j + 2:])
        runs[j:j + 2] = [merged]
        adj = new_adj
        fit = best_fit if len(runs) > 1 else 0.0
        steps.append(MergeStep(j + 1, j + 2, fit))
        partitions.append(Partition(tuple(edges[r[1]] for r in runs[:-1]), init.T))
        if len(runs) > 1:
            gof.append(fit)
    best_level = 0
    for level, value in enumerate(gof):
        if value > gof[best_level] + TIE_TOL:
            best_level = level
    return MergeTrace(
        initial=init,
        steps=steps,
        gof=gof,
        best_k=n - best_level,
        best_partition=partitions[best_level],
        partitions=partitions,
    )
