"""Fundamental solutions and the combined test-function object.

The Laplace kernels are -|x-s|/2 in 1D and -(1/(2 pi)) log |x-s| in 2D; the
2D kernel is evaluated internally as -(1/(4 pi)) log |x-s|^2 so no square
root enters the hot path.  A 2D test function is

    phi(x) = a_int * Gamma(s_int, x) + sum_i a_i Gamma(s_i, x) + C,

with the exterior sources and the constant shift forming the harmonic part.
Box evaluations over all sources are vectorized with directed rounding; the
shift is carried as an interval so rigorous boundary bounds propagate
without premature rounding.

The N >= 3 kernel 1 / ((N-2) omega_N |x-s|^(N-2)) is intentionally not
implemented; constructing a Kernel with dim >= 3 is rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _directed as dr
from .errors import DomainError
from .interval import PI, Interval

__all__ = ["Kernel", "TestFunction2D", "gamma", "eval_phi", "phi_minus_singular",
           "INV_2PI", "INV_4PI"]

INV_2PI = Interval(1.0, 1.0) / (PI * 2.0)
INV_4PI = Interval(1.0, 1.0) / (PI * 4.0)
NEG_INV_2PI = -INV_2PI
NEG_INV_4PI = -INV_4PI


@dataclass(frozen=True, slots=True)
class Kernel:
    dim: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"only dimensions 1 and 2 are supported, got {self.dim}")


def _as_interval(v) -> Interval:
    return v if isinstance(v, Interval) else Interval.point(float(v))


def gamma(kernel: Kernel, s, x) -> Interval:
    """Rigorous enclosure of Gamma(s, x); x may be a point or a box."""
    if kernel.dim == 1:
        dx = _as_interval(x) - float(s)
        return abs(dx) * (-0.5)
    sx, sy = float(s[0]), float(s[1])
    bx, by = x
    dx = _as_interval(bx) - sx
    dy = _as_interval(by) - sy
    d2 = dx.sqr() + dy.sqr()
    if d2.lo <= 0.0:
        raise DomainError(
            f"kernel evaluated on a region containing its source ({sx}, {sy})"
        )
    return d2.log() * NEG_INV_4PI


@dataclass(frozen=True)
class TestFunction2D:
    """a_int * Gamma(s_int, .) + sum_i a_i Gamma(s_i, .) + shift."""

    s_int: tuple
    a_int: float
    sources: np.ndarray  # (n, 2)
    coeffs: np.ndarray  # (n,)
    shift: Interval = field(default_factory=lambda: Interval(0.0, 0.0))

    def __post_init__(self):
        if self.a_int == 0.0:
            raise DomainError("interior weight a_int must be nonzero")
        src = np.asarray(self.sources, dtype=float).reshape(-1, 2)
        cof = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if src.shape[0] != cof.shape[0]:
            raise DomainError("sources and coefficients must have equal length")
        object.__setattr__(self, "sources", src)
        object.__setattr__(self, "coeffs", cof)
        object.__setattr__(self, "s_int", (float(self.s_int[0]), float(self.s_int[1])))

    def with_shift(self, shift: Interval) -> "TestFunction2D":
        return TestFunction2D(self.s_int, self.a_int, self.sources, self.coeffs, shift)

    # -- rigorous evaluations -----------------------------------------

    def _sources_term(self, bx: Interval, by: Interval) -> Interval:
        if self.sources.shape[0] == 0:
            return Interval(0.0, 0.0)
        sx = self.sources[:, 0]
        sy = self.sources[:, 1]
        dxlo, dxhi = dr.iv_sub(bx.lo, bx.hi, sx, sx)
        dylo, dyhi = dr.iv_sub(by.lo, by.hi, sy, sy)
        x2lo, x2hi = dr.iv_sqr(dxlo, dxhi)
        y2lo, y2hi = dr.iv_sqr(dylo, dyhi)
        d2lo, d2hi = dr.iv_add(x2lo, x2hi, y2lo, y2hi)
        if np.any(d2lo <= 0.0):
            raise DomainError("evaluation region touches an exterior source point")
        llo, lhi = dr.iv_log(d2lo, d2hi)
        glo, ghi = dr.iv_mul(llo, lhi, NEG_INV_4PI.lo, NEG_INV_4PI.hi)
        return dr.iv_dot(self.coeffs, glo, ghi)

    def phi0_box(self, bx: Interval, by: Interval) -> Interval:
        """Enclosure of phi^0 = a_int Gamma(s_int, .) + sum a_i Gamma(s_i, .)."""
        k2 = Kernel(2)
        total = gamma(k2, self.s_int, (bx, by)) * self.a_int
        return total + self._sources_term(bx, by)

    def phi_box(self, bx: Interval, by: Interval) -> Interval:
        return self.phi0_box(bx, by) + self.shift

    def phi0_dir_deriv(
        self, bx: Interval, by: Interval, vx: Interval, vy: Interval
    ) -> Interval:
        """Enclosure of the derivative of t -> phi^0(p + t v) over a box.

        grad Gamma(s, x) . v = -(1/(2 pi)) ((x-s) . v) / |x-s|^2.
        """
        sx = np.concatenate(([self.s_int[0]], self.sources[:, 0]))
        sy = np.concatenate(([self.s_int[1]], self.sources[:, 1]))
        weights = np.concatenate(([self.a_int], self.coeffs))
        dxlo, dxhi = dr.iv_sub(bx.lo, bx.hi, sx, sx)
        dylo, dyhi = dr.iv_sub(by.lo, by.hi, sy, sy)
        x2lo, x2hi = dr.iv_sqr(dxlo, dxhi)
        y2lo, y2hi = dr.iv_sqr(dylo, dyhi)
        d2lo, d2hi = dr.iv_add(x2lo, x2hi, y2lo, y2hi)
        if np.any(d2lo <= 0.0):
            raise DomainError("derivative region touches a kernel source")
        pxlo, pxhi = dr.iv_mul(dxlo, dxhi, vx.lo, vx.hi)
        pylo, pyhi = dr.iv_mul(dylo, dyhi, vy.lo, vy.hi)
        nlo, nhi = dr.iv_add(pxlo, pxhi, pylo, pyhi)
        # interval division num / den with den > 0
        q1 = nlo / d2lo
        q2 = nlo / d2hi
        q3 = nhi / d2lo
        q4 = nhi / d2hi
        qlo = dr.next_down(np.minimum(np.minimum(q1, q2), np.minimum(q3, q4)))
        qhi = dr.next_up(np.maximum(np.maximum(q1, q2), np.maximum(q3, q4)))
        glo, ghi = dr.iv_mul(qlo, qhi, NEG_INV_2PI.lo, NEG_INV_2PI.hi)
        return dr.iv_dot(weights, glo, ghi)

    # -- approximate evaluations (candidate quality only) ---------------

    def phi0_points(self, pts: np.ndarray) -> np.ndarray:
        """Plain float64 phi^0 at an (m, 2) array of points."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        d2_int = np.sum((pts - np.asarray(self.s_int)) ** 2, axis=1)
        vals = self.a_int * (-0.25 / np.pi) * np.log(d2_int)
        if self.sources.shape[0]:
            diff = pts[:, None, :] - self.sources[None, :, :]
            d2 = np.sum(diff**2, axis=2)
            vals = vals + (-0.25 / np.pi) * (np.log(d2) @ self.coeffs)
        return vals


def eval_phi(tf: TestFunction2D, x) -> Interval:
    """Rigorous phi(x) at a point (x, y) or box (Interval, Interval)."""
    bx, by = x
    return tf.phi_box(_as_interval(bx), _as_interval(by))


def phi_minus_singular(tf: TestFunction2D, x) -> Interval:
    """Rigorous enclosure of the smooth part sum a_i Gamma(s_i, .) + shift."""
    bx, by = x
    return tf._sources_term(_as_interval(bx), _as_interval(by)) + tf.shift
