"""Contiguous segmentations of a time index ``1..T``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Partition:
    """A split of ``1..T`` into contiguous clusters.

    ``boundaries`` holds the change points ``tau_1 < ... < tau_k``; each is
    the (1-based) last index of the cluster to its left, so the clusters
    are ``1..tau_1``, ``tau_1+1..tau_2``, ..., ``tau_k+1..T``. With 0-based
    slicing the same numbers read ``x[:tau_1]``, ``x[tau_1:tau_2]``, ...
    """

    boundaries: Tuple[int, ...]
    T: int

    def __post_init__(self):
        b = tuple(int(t) for t in self.boundaries)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "T", int(self.T))
        if self.T < 1:
            raise InvalidInputError(f"T must be >= 1, got {self.T}")
        prev = 0
        for t in b:
            if not prev < t < self.T:
                raise InvalidInputError(
                    f"change points must be strictly increasing within (0, {self.T}), "
                    f"got {list(b)}"
                )
            prev = t

    @classmethod
    def single(cls, T: int) -> "Partition":
        return cls((), T)

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "Partition":
        """Build from a per-observation label sequence of contiguous runs."""
        labels = list(labels)
        cps = [i for i in range(1, len(labels)) if labels[i] != labels[i - 1]]
        return cls(tuple(cps), len(labels))

    @property
    def n_clusters(self) -> int:
        return len(self.boundaries) + 1

    def segments(self) -> List[Tuple[int, int]]:
        """Clusters as 1-based inclusive ``(start, end)`` pairs."""
        edges = (0,) + self.boundaries + (self.T,)
        return [(edges[i] + 1, edges[i + 1]) for i in range(len(edges) - 1)]

    def sizes(self) -> List[int]:
        edges = (0,) + self.boundaries + (self.T,)
        return [edges[i + 1] - edges[i] for i in range(len(edges) - 1)]

    def labels(self) -> np.ndarray:
        out = np.empty(self.T, dtype=np.int64)
        for i, (s, e) in enumerate(self.segments()):
            out[s - 1:e] = i
        return out

    def with_boundary(self, tau: int) -> "Partition":
        if tau in self.boundaries:
            raise InvalidInputError(f"{tau} is already a change point")
        return Partition(tuple(sorted(self.boundaries + (int(tau),))), self.T)

    def refines(self, other: "Partition") -> bool:
        """True if every boundary of ``other`` is also a boundary here."""
        return self.T == other.T and set(other.boundaries) <= set(self.boundaries)
