"""Energy-statistic divergence between samples and the two-sample split scan.

All time indices in the public API are 1-based: a segment ``(start, end)``
is inclusive on both ends, and a split ``tau`` is the last index of the
left sample.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Tuple

import numba
import numpy as np

from .errors import InsufficientSampleError, InvalidInputError

#: Candidates whose statistics differ by no more than this are tied.
TIE_TOL = 1e-12

DEFAULT_MIN_SIZE = 30


class SplitCandidate(NamedTuple):
    """A proposed split of a segment.

    ``tau`` is the last index of the left sample and ``kappa`` the last
    index of the right sample; ``qhat`` is the scaled divergence between
    them.
    """

    tau: int
    kappa: int
    qhat: float


def check_alpha(alpha) -> float:
    """Validate a distance exponent and return it as a float."""
    a = float(alpha)
    if not 0.0 < a < 2.0:
        raise InvalidInputError(f"alpha must lie in (0, 2), got {alpha!r}")
    return a


def as_series(data) -> np.ndarray:
    """Coerce ``data`` to a finite ``(T, d)`` float64 array.

    One-dimensional input is treated as a univariate series.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InvalidInputError(f"series must be 1-D or 2-D, got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise InvalidInputError(f"series must have T >= 1 and d >= 1, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise InvalidInputError(
            f"non-finite value at observation {bad[0] + 1}, column {bad[1] + 1}"
        )
    return np.ascontiguousarray(x)


def _as_sample(data, name) -> np.ndarray:
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise InvalidInputError(f"{name} must be 1-D or 2-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return x


def alpha_distance(a, b, alpha) -> float:
    """Return ``|a - b| ** alpha`` for the Euclidean norm."""
    alpha = check_alpha(alpha)
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("vectors must be finite")
    diff = a - b
    return math.sqrt(float(np.dot(diff, diff))) ** alpha


@numba.njit(cache=True, nogil=True)
def _self_pairwise(X, alpha):
    n, d = X.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i):
            s = 0.0
            for c in range(d):
                diff = X[i, c] - X[j, c]
                s += diff * diff
            v = math.sqrt(s) if alpha == 1.0 else math.sqrt(s) ** alpha
            out[i, j] = v
            out[j, i] = v
    return out


def distance_matrix(series, alpha) -> np.ndarray:
    """Symmetric ``T x T`` matrix of ``|Z_i - Z_j| ** alpha``."""
    return _self_pairwise(as_series(series), check_alpha(alpha))


def _combine(between, within_x, within_y, n, m):
    # Same operation order as the compiled scan so results agree bitwise.
    return 2.0 * between / (n * m) - (
        within_x / (n * (n - 1) / 2.0) + within_y / (m * (m - 1) / 2.0)
    )


_combine_jit = numba.njit(cache=True, nogil=True)(_combine)


def divergence_from_sums(between, within_x, within_y, n, m) -> float:
    """Empirical divergence from its three distance sums.

    ``between`` is the sum over all cross pairs, ``within_x`` and
    ``within_y`` the sums over unordered pairs inside each sample.
    """
    return _combine(float(between), float(within_x), float(within_y), n, m)


def scaled_from_sums(between, within_x, within_y, n, m) -> float:
    return divergence_from_sums(between, within_x, within_y, n, m) * (n * m / (n + m))


@numba.njit(cache=True, nogil=True)
def _cross_sum(X, Y, alpha):
    # Neumaier-compensated sum of |X_i - Y_j|^alpha in row-major order.
    n, d = X.shape
    m = Y.shape[0]
    total = 0.0
    comp = 0.0
    for i in range(n):
        for j in range(m):
            s = 0.0
            for c in range(d):
                diff = X[i, c] - Y[j, c]
                s += diff * diff
            v = math.sqrt(s) if alpha == 1.0 else math.sqrt(s) ** alpha
            t = total + v
            if abs(total) >= abs(v):
                comp += (total - t) + v
            else:
                comp += (v - t) + total
            total = t
    return total + comp


@numba.njit(cache=True, nogil=True)
def _within_sum(X, alpha):
    n, d = X.shape
    total = 0.0
    comp = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for c in range(d):
                diff = X[i, c] - X[j, c]
                s += diff * diff
            v = math.sqrt(s) if alpha == 1.0 else math.sqrt(s) ** alpha
            t = total + v
            if abs(total) >= abs(v):
                comp += (total - t) + v
            else:
                comp += (v - t) + total
            total = t
    return total + comp


def _canonical_rows(X):
    X = X + 0.0  # -0.0 -> 0.0
    order = np.lexsort(X.T[::-1])
    return np.ascontiguousarray(X[order])


def empirical_divergence(X, Y, alpha) -> float:
    """Empirical energy divergence between two samples.

    Parameters
    ----------
    X, Y : array_like
        Samples of shape ``(n, d)`` and ``(m, d)``; 1-D input is univariate.
    alpha : float
        Distance exponent in ``(0, 2)``.

    Returns
    -------
    float
        Twice the mean cross distance minus the two within-sample
        U-statistic means. May be negative for finite samples.

    Notes
    -----
    Rows of each sample are sorted and the pair is put in a fixed order
    before summing, so the value is exactly symmetric in ``X``/``Y`` and
    exactly invariant to reordering inside either sample.
    """
    alpha = check_alpha(alpha)
    X = _as_sample(X, "X")
    Y = _as_sample(Y, "Y")
    n, m = X.shape[0], Y.shape[0]
    if n < 2 or m < 2:
        raise InsufficientSampleError(f"both samples need >= 2 points, got n={n}, m={m}")
    if X.shape[1] != Y.shape[1]:
        raise InvalidInputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    X, Y = _canonical_rows(X), _canonical_rows(Y)
    if (m, Y.tobytes()) < (n, X.tobytes()):
        X, Y, n, m = Y, X, m, n
    between = _cross_sum(X, Y, alpha)
    return _combine(between, _within_sum(X, alpha), _within_sum(Y, alpha), n, m)


def scaled_divergence(X, Y, alpha) -> float:
    """``m n / (m + n)`` times :func:`empirical_divergence`."""
    e = empirical_divergence(X, Y, alpha)
    n = np.asarray(X).shape[0]
    m = np.asarray(Y).shape[0]
    return e * (n * m / (n + m))


@numba.njit(cache=True, nogil=True)
def scan_indexed(D, idx, min_size):
    """Best ``(tau, kappa)`` split of the observations ``idx`` (in order).

    Positions are 0-based into ``idx``: the left sample is ``idx[:t+1]``
    and the right sample ``idx[t+1:k+1]``. Returns ``(-1, -1, -inf)`` when
    no admissible split exists.

    Row prefix sums give every cross and within sum in O(1), so the scan
    is O(L^2) for ``L = len(idx)``.
    """
    L = idx.shape[0]
    best_t = -1
    best_k = -1
    best_q = -np.inf
    if L < 2 * min_size:
        return best_t, best_k, best_q
    # prefix[r, c] = sum_{j < c} D[idx[r], idx[j]]
    prefix = np.empty((L, L + 1))
    for r in range(L):
        acc = 0.0
        prefix[r, 0] = 0.0
        row = idx[r]
        for c in range(L):
            acc += D[row, idx[c]]
            prefix[r, c + 1] = acc
    within_left = 0.0
    for t in range(L - min_size):
        within_left += prefix[t, t]
        n = t + 1
        if n < min_size:
            continue
        within_right = 0.0
        between = 0.0
        for k in range(t + 1, L):
            split = prefix[k, t + 1]
            within_right += prefix[k, k] - split
            between += split
            m = k - t
            if m < min_size:
                continue
            q = _combine_jit(between, within_left, within_right, n, m) * (n * m / (n + m))
            if q > best_q + 1e-12:
                best_q = q
                best_t = t
                best_k = k
    return best_t, best_k, best_q


def _check_min_size(min_size) -> int:
    if int(min_size) != min_size or min_size < 2:
        raise InvalidInputError(f"min_size must be an integer >= 2, got {min_size!r}")
    return int(min_size)


def split_segment(D, start, end, min_size) -> Optional[SplitCandidate]:
    """Scan the 1-based inclusive segment ``start..end`` of a distance matrix."""
    idx = np.arange(start - 1, end, dtype=np.int64)
    t, k, q = scan_indexed(D, idx, min_size)
    if t < 0:
        return None
    return SplitCandidate(int(start + t), int(start + k), float(q))


def best_split(series, seg: Optional[Tuple[int, int]] = None, alpha=1.0,
               min_size=DEFAULT_MIN_SIZE) -> Optional[SplitCandidate]:
    """Locate the split maximizing the scaled divergence within a segment.

    Every ``tau`` with ``tau - start + 1 >= min_size`` is paired with every
    ``kappa`` with ``kappa - tau >= min_size``. Ties (within ``TIE_TOL``)
    go to the smallest ``tau`` and then the smallest ``kappa``.

    Returns
    -------
    SplitCandidate or None
        None when the segment is shorter than ``2 * min_size``.
    """
    X = as_series(series)
    alpha = check_alpha(alpha)
    min_size = _check_min_size(min_size)
    T = X.shape[0]
    start, end = (1, T) if seg is None else (int(seg[0]), int(seg[1]))
    if not 1 <= start <= end <= T:
        raise InvalidInputError(f"segment ({start}, {end}) outside 1..{T}")
    D = _self_pairwise(X[start - 1:end], alpha)
    cand = split_segment(D, 1, end - start + 1, min_size)
    if cand is None:
        return None
    return SplitCandidate(cand.tau + start - 1, cand.kappa + start - 1, cand.qhat)
