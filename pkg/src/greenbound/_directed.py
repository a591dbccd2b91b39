"""Directed-rounding helpers on numpy arrays of interval endpoints.

Interval vectors/grids are represented as (lo, hi) float64 ndarray pairs.
All operations nudge endpoints outward with ``np.nextafter``; transcendental
functions get extra ulps because numpy's SIMD kernels are faithful rather
than correctly rounded.  Sums use ``math.fsum`` (exactly rounded) plus one
outward nudge, so long reductions stay rigorous.

These helpers mirror the semantics of :mod:`greenbound.interval`; the test
suite cross-checks the two paths against each other.
"""

from __future__ import annotations

import math

import numpy as np

from . import interval as _iv
from .errors import DomainError

_INF = np.inf
_NP_LIBM_ULPS = 4


def next_down(x: np.ndarray) -> np.ndarray:
    if not _iv._outward_rounding:
        return x
    return np.nextafter(x, -_INF)


def next_up(x: np.ndarray) -> np.ndarray:
    if not _iv._outward_rounding:
        return x
    return np.nextafter(x, _INF)


def _down_n(x: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        x = next_down(x)
    return x


def _up_n(x: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        x = next_up(x)
    return x


def _sum_down(a, b):
    """Largest float array <= a + b elementwise (TwoSum-compensated)."""
    s = a + b
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    return np.where(err < 0.0, next_down(s), s)


def _sum_up(a, b):
    s = a + b
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    return np.where(err > 0.0, next_up(s), s)


def iv_add(alo, ahi, blo, bhi):
    return _sum_down(alo, blo), _sum_up(ahi, bhi)


def iv_sub(alo, ahi, blo, bhi):
    return _sum_down(alo, -bhi), _sum_up(ahi, -blo)


def iv_mul(alo, ahi, blo, bhi):
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return next_down(lo), next_up(hi)


def iv_scale(lo, hi, c: float):
    """Multiply an interval array by an exact float scalar."""
    if c >= 0.0:
        return next_down(lo * c), next_up(hi * c)
    return next_down(hi * c), next_up(lo * c)


def iv_sqr(lo, hi):
    a = np.abs(lo)
    b = np.abs(hi)
    lo_m = np.minimum(a, b)
    hi_m = np.maximum(a, b)
    straddles = (lo <= 0.0) & (hi >= 0.0)
    out_lo = np.where(straddles, 0.0, np.maximum(0.0, next_down(lo_m * lo_m)))
    out_hi = next_up(hi_m * hi_m)
    return out_lo, out_hi


def iv_log(lo, hi):
    if np.any(lo <= 0.0):
        raise DomainError("log of interval array touching nonpositive reals")
    return _down_n(np.log(lo), _NP_LIBM_ULPS), _up_n(np.log(hi), _NP_LIBM_ULPS)


def iv_sqrt(lo, hi):
    if np.any(lo < 0.0):
        raise DomainError("sqrt of interval array with negative part")
    return np.maximum(0.0, next_down(np.sqrt(lo))), next_up(np.sqrt(hi))


def iv_sum(lo, hi) -> _iv.Interval:
    """Rigorous interval sum of an interval array."""
    s_lo = math.fsum(map(float, np.ravel(lo)))
    s_hi = math.fsum(map(float, np.ravel(hi)))
    return _iv.Interval(_iv._next_down(s_lo), _iv._next_up(s_hi))


def iv_dot(weights: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> _iv.Interval:
    """Rigorous enclosure of sum_i w_i * [lo_i, hi_i] for exact float weights."""
    pos = weights >= 0.0
    out_lo = next_down(np.where(pos, weights * lo, weights * hi))
    out_hi = next_up(np.where(pos, weights * hi, weights * lo))
    return iv_sum(out_lo, out_hi)
