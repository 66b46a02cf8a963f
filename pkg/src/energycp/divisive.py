"""Hierarchical bisection with a within-cluster permutation test (E-Divisive).

Each step scans every current cluster for its best ``(tau, kappa)`` split
and proposes the one with the largest scaled divergence. The proposal is
accepted when its permutation p-value is below the significance level;
the first rejected proposal ends the procedure.

Permutation replicate ``r`` of step ``k`` draws from its own stream seeded
by ``(seed, k, r)``, so p-values do not depend on how replicates are
scheduled across threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .energy import (
    DEFAULT_MIN_SIZE,
    SplitCandidate,
    _check_min_size,
    as_series,
    check_alpha,
    distance_matrix,
    scan_indexed,
)
from .errors import InvalidInputError
from .partition import Partition

THREADS_ENV = "ENERGYCP_THREADS"


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise InvalidInputError(f"{THREADS_ENV} must be an integer, got {env!r}")
        if n < 1:
            raise InvalidInputError(f"{THREADS_ENV} must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class DivisiveConfig:
    alpha: float = 1.0
    min_size: int = DEFAULT_MIN_SIZE
    num_permutations: int = 499
    sig_level: float = 0.05
    max_change_points: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        object.__setattr__(self, "min_size", _check_min_size(self.min_size))
        if int(self.num_permutations) != self.num_permutations or self.num_permutations < 1:
            raise InvalidInputError(
                f"num_permutations must be an integer >= 1, got {self.num_permutations!r}"
            )
        if not 0.0 < self.sig_level < 1.0:
            raise InvalidInputError(f"sig_level must lie in (0, 1), got {self.sig_level!r}")
        if self.max_change_points is not None and self.max_change_points < 0:
            raise InvalidInputError("max_change_points must be >= 0 or None")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        object.__setattr__(self, "num_permutations", int(self.num_permutations))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class DivisiveStep:
    k: int
    tau_hat: int
    kappa_hat: int
    qhat: float
    pvalue: float
    exceedances: int
    significant: bool


@dataclass
class DivisiveResult:
    estimates: List[DivisiveStep]
    final_partition: Partition
    config: DivisiveConfig
    permutations: int = 0

    @property
    def change_points(self) -> List[int]:
        return list(self.final_partition.boundaries)

    def to_dict(self) -> dict:
        return {
            "estimates": [asdict(s) for s in self.estimates],
            "change_points": self.change_points,
            "T": self.final_partition.T,
            "config": asdict(self.config),
            "permutations": self.permutations,
        }


def _best_over_clusters(D, order, partition, min_size) -> Tuple[int, Optional[SplitCandidate]]:
    """Largest split statistic over all clusters of ``partition``.

    ``order`` maps time positions to rows of ``D`` (identity for the
    observed series, a within-cluster shuffle for a replicate).
    """
    best_i, best = -1, None
    for i, (s, e) in enumerate(partition.segments()):
        if e - s + 1 < 2 * min_size:
            continue
        t, k, q = scan_indexed(D, order[s - 1:e], min_size)
        if t < 0:
            continue
        # Strict comparison keeps the earliest cluster on ties.
        if best is None or q > best.qhat + 1e-12:
            best_i, best = i, SplitCandidate(s + int(t), s + int(k), float(q))
    return best_i, best


def _propose(D, partition, min_size):
    order = np.arange(partition.T, dtype=np.int64)
    i, cand = _best_over_clusters(D, order, partition, min_size)
    if cand is None:
        return None
    return i + 1, cand


def _check_partition(X, partition) -> Partition:
    if partition is None:
        return Partition.single(X.shape[0])
    if partition.T != X.shape[0]:
        raise InvalidInputError(
            f"partition covers {partition.T} observations but series has {X.shape[0]}"
        )
    return partition


def propose_next(series, partition: Optional[Partition], cfg: DivisiveConfig):
    """Best split across all clusters of ``partition``.

    Returns
    -------
    (int, SplitCandidate) or None
        The 1-based index of the chosen cluster and its split, or None when
        no cluster is at least ``2 * cfg.min_size`` long.
    """
    X = as_series(series)
    partition = _check_partition(X, partition)
    return _propose(distance_matrix(X, cfg.alpha), partition, cfg.min_size)


def replicate_rng(seed: int, k: int, r: int) -> np.random.Generator:
    """Independent generator for permutation replicate ``r`` of step ``k``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, k, r])))


def _replicate_stat(D, partition, min_size, seed, k, r) -> float:
    rng = replicate_rng(seed, k, r)
    order = np.arange(partition.T, dtype=np.int64)
    for s, e in partition.segments():
        # Generator.shuffle is an in-place Fisher-Yates pass.
        rng.shuffle(order[s - 1:e])
    _, best = _best_over_clusters(D, order, partition, min_size)
    return -np.inf if best is None else best.qhat


def approx_pvalue(exceedances: int, num_permutations: int) -> float:
    """Share of ``R + 1`` draws (observed included) at or above the observed value."""
    if not 0 <= exceedances <= num_permutations:
        raise InvalidInputError(f"exceedances must lie in 0..{num_permutations}")
    return exceedances / (num_permutations + 1)


def _count_exceedances(D, partition, observed_q, cfg, k, threads) -> int:
    R = cfg.num_permutations

    def stat(r):
        return _replicate_stat(D, partition, cfg.min_size, cfg.seed, k, r)

    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        stats = [stat(r) for r in range(1, R + 1)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stats = list(pool.map(stat, range(1, R + 1)))
    return int(sum(1 for q in stats if q >= observed_q))


def permutation_pvalue(series, partition: Optional[Partition], observed_q: float,
                       cfg: DivisiveConfig, k: int = 1, threads: Optional[int] = None) -> float:
    """Approximate p-value of ``observed_q`` given the current clusters.

    Each of ``cfg.num_permutations`` replicates shuffles observations within
    every cluster (never across), re-runs the split search over all clusters
    and records the maximal statistic. The p-value is the number of
    replicates at least as large as ``observed_q``, divided by ``R + 1``.

    ``k`` is the step number and only selects the random streams.
    """
    X = as_series(series)
    partition = _check_partition(X, partition)
    D = distance_matrix(X, cfg.alpha)
    exceed = _count_exceedances(D, partition, observed_q, cfg, k, threads)
    return approx_pvalue(exceed, cfg.num_permutations)


def e_divisive(series, cfg: Optional[DivisiveConfig] = None,
               threads: Optional[int] = None) -> DivisiveResult:
    """Estimate multiple change points by significance-tested bisection.

    Parameters
    ----------
    series : array_like
        ``(T, d)`` observations in time order (1-D for univariate).
    cfg : DivisiveConfig, optional
        Procedure settings; defaults to ``DivisiveConfig()``.
    threads : int, optional
        Worker threads for permutation replicates. Results are identical
        for every value.

    Returns
    -------
    DivisiveResult
        All tested steps in order. Only the last one can be
        non-significant; ``final_partition`` uses the significant ones.
    """
    cfg = cfg or DivisiveConfig()
    X = as_series(series)
    T = X.shape[0]
    partition = Partition.single(T)
    steps: List[DivisiveStep] = []
    n_perm = 0
    if T < 2 * cfg.min_size:
        return DivisiveResult(steps, partition, cfg, 0)
    D = distance_matrix(X, cfg.alpha)
    cap = cfg.max_change_points
    while cap is None or len(partition.boundaries) < cap:
        prop = _propose(D, partition, cfg.min_size)
        if prop is None:
            break
        _, cand = prop
        k = len(steps) + 1
        exceed = _count_exceedances(D, partition, cand.qhat, cfg, k, threads)
        n_perm += cfg.num_permutations
        p = approx_pvalue(exceed, cfg.num_permutations)
        significant = p < cfg.sig_level
        steps.append(DivisiveStep(k, cand.tau, cand.kappa, cand.qhat, p, exceed, significant))
        if not significant:
            break
        partition = partition.with_boundary(cand.tau)
    return DivisiveResult(steps, partition, cfg, n_perm)
