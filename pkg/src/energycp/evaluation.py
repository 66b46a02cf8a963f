"""Agreement between two segmentations: Rand and adjusted Rand indices.

Both indices are computed from the table of overlaps between the two sets
of contiguous segments, so the cost is ``O(k_u + k_v)`` rather than
``O(T^2)`` pair enumeration. All pair counts are Python integers; the only
floating-point operation is the final division.
"""

from __future__ import annotations

from typing import Iterable, List, Tuple

from .errors import InvalidInputError
from .partition import Partition


def _pairs(n: int) -> int:
    return n * (n - 1) // 2


def overlap_sizes(u: Partition, v: Partition) -> List[int]:
    """Sizes of the nonempty intersections between segments of ``u`` and ``v``.

    Segments are contiguous, so a sweep over the merged boundary list yields
    every nonzero contingency-table cell exactly once.
    """
    if u.T != v.T:
        raise InvalidInputError(f"partitions cover different lengths: {u.T} vs {v.T}")
    cuts = sorted(set(u.boundaries) | set(v.boundaries))
    edges = [0] + cuts + [u.T]
    cells: dict = {}
    iu = iv = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        while iu < len(u.boundaries) and u.boundaries[iu] <= lo:
            iu += 1
        while iv < len(v.boundaries) and v.boundaries[iv] <= lo:
            iv += 1
        cells[(iu, iv)] = cells.get((iu, iv), 0) + (hi - lo)
    return list(cells.values())


def _pair_counts(u: Partition, v: Partition) -> Tuple[int, int, int, int]:
    if u.T != v.T:
        raise InvalidInputError(f"partitions cover different lengths: {u.T} vs {v.T}")
    if u.T < 2:
        raise InvalidInputError("need T >= 2 to compare pairs")
    both = sum(_pairs(c) for c in overlap_sizes(u, v))
    same_u = sum(_pairs(s) for s in u.sizes())
    same_v = sum(_pairs(s) for s in v.sizes())
    return both, same_u, same_v, _pairs(u.T)


def rand_index(u: Partition, v: Partition) -> float:
    """Fraction of observation pairs on which ``u`` and ``v`` agree.

    A pair agrees when it is co-clustered in both partitions or separated in
    both.
    """
    both, same_u, same_v, total = _pair_counts(u, v)
    apart_both = total - same_u - same_v + both
    return (both + apart_both) / total


def adjusted_rand(u: Partition, v: Partition) -> float:
    """Rand index corrected for chance under the hypergeometric model.

    Returns ``(Rand - E[Rand]) / (1 - E[Rand])`` with the expectation taken
    over random partitions with the same cluster counts and sizes (the
    Hubert-Arabie form). When the expectation is 1, which happens only when
    both partitions are the same trivial partition, the result is 1.
    """
    return adjusted_rand_from_counts(*_pair_counts(u, v))


def adjusted_rand_from_counts(both: int, same_u: int, same_v: int, total: int) -> float:
    """Adjusted Rand index from integer pair counts.

    ``both`` counts pairs co-clustered in both partitions, ``same_u`` and
    ``same_v`` pairs co-clustered in each, ``total`` all pairs.
    """
    # Scale numerator and denominator by total to stay in integers.
    num = both * total - same_u * same_v
    den = (same_u + same_v) * total - 2 * same_u * same_v
    if den == 0:
        return 1.0
    return 2 * num / den


def pair_counts_from_table(cells: Iterable[int], sizes_u: Iterable[int],
                           sizes_v: Iterable[int]) -> Tuple[int, int, int, int]:
    """Pair counts from contingency cells and the two sets of cluster sizes.

    Works for arbitrary (not necessarily contiguous) clusterings.
    """
    sizes_u = [int(s) for s in sizes_u]
    total = sum(sizes_u)
    return (
        sum(_pairs(int(c)) for c in cells),
        sum(_pairs(s) for s in sizes_u),
        sum(_pairs(int(s)) for s in sizes_v),
        _pairs(total),
    )
