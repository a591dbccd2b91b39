"""MFS collocation solve and rigorous boundary extrema of the candidate.

The collocation solve is plain binary64 LU: it only produces a *candidate*
test function, so no rigor is needed there and none is claimed.  All rigor
enters through ``boundary_extrema``, which bounds the candidate over every
polygon edge with interval branch-and-bound; the enclosure built from the
resulting m and M stays mathematically sound no matter how badly the MFS
system was conditioned (bad conditioning only costs sharpness).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolveError
from .fundsol import TestFunction2D
from .geometry import Polygon
from .interval import Interval, subdivide_min_max

__all__ = ["MfsSolution", "solve_coefficients", "boundary_extrema",
           "make_enclosure_pair", "solve"]


def solve_coefficients(
    collocation: np.ndarray, sources: np.ndarray, s_int
) -> tuple[np.ndarray, float, float]:
    """Solve the square collocation system for the source coefficients.

    Matrix entries Gamma(s_j, x_i), right-hand side -Gamma(s_int, x_i).
    Returns (coefficients, max collocation residual, condition estimate).
    """
    x = np.asarray(collocation, dtype=float).reshape(-1, 2)
    s = np.asarray(sources, dtype=float).reshape(-1, 2)
    if x.shape[0] != s.shape[0]:
        raise SolveError("collocation and source counts must match")
    diff = x[:, None, :] - s[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    if np.any(d2 <= 0.0):
        raise SolveError("a source point coincides with a collocation point")
    G = (-0.25 / np.pi) * np.log(d2)
    d2_int = np.sum((x - np.asarray(s_int, dtype=float)) ** 2, axis=1)
    rhs = -(-0.25 / np.pi) * np.log(d2_int)
    try:
        a = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError as e:
        raise SolveError(f"singular collocation matrix: {e}") from None
    if not np.all(np.isfinite(a)):
        raise SolveError("collocation solve produced non-finite coefficients")
    residual = float(np.max(np.abs(G @ a - rhs)))
    try:
        cond = float(np.linalg.cond(G))
    except np.linalg.LinAlgError:
        cond = float("inf")
    return a, residual, cond


@dataclass(frozen=True)
class MfsSolution:
    """Candidate phi^0 (zero shift) with rigorous boundary extrema."""

    tf0: TestFunction2D
    residual_report: float
    m: Interval
    M: Interval
    cond_estimate: float
    extrema_converged: bool


def boundary_extrema(
    tf0: TestFunction2D,
    poly: Polygon,
    tol: float = 1e-9,
    max_depth: int = 48,
) -> tuple[Interval, Interval, bool]:
    """Rigorous enclosures (m, M) of min/max of phi^0 over the boundary.

    Each edge is parameterized linearly by t in [0, 1] and bounded by
    interval branch-and-bound; the directional derivative of phi^0 along
    the edge provides monotonicity pruning and mean-value tightening.
    """
    m: Interval | None = None
    M: Interval | None = None
    converged = True
    for a, b in poly.edges():
        ax, ay = Interval.point(float(a[0])), Interval.point(float(a[1]))
        vx = Interval.point(float(b[0])) - ax
        vy = Interval.point(float(b[1])) - ay

        def g(t: Interval) -> Interval:
            return tf0.phi0_box(ax + vx * t, ay + vy * t)

        def gp(t: Interval) -> Interval:
            return tf0.phi0_dir_deriv(ax + vx * t, ay + vy * t, vx, vy)

        res = subdivide_min_max(
            g, Interval(0.0, 1.0), tol=tol, max_depth=max_depth, g_prime=gp
        )
        converged = converged and res.converged
        m = res.m if m is None else Interval(min(m.lo, res.m.lo), min(m.hi, res.m.hi))
        M = res.M if M is None else Interval(max(M.lo, res.M.lo), max(M.hi, res.M.hi))
    return m, M, converged


def make_enclosure_pair(sol: MfsSolution) -> tuple[TestFunction2D, TestFunction2D]:
    """Shifted test functions (phi_upper, phi_lower).

    phi_upper = phi^0 - m uses the outward endpoint m.lo so phi_upper >= 0
    on the boundary is guaranteed; phi_lower = phi^0 - M uses M.hi.
    """
    phi_upper = sol.tf0.with_shift(Interval.point(-sol.m.lo))
    phi_lower = sol.tf0.with_shift(Interval.point(-sol.M.hi))
    return phi_upper, phi_lower


def solve(
    poly: Polygon,
    collocation: np.ndarray,
    sources: np.ndarray,
    s_int,
    tol: float = 1e-9,
) -> MfsSolution:
    """Full candidate construction: solve, then bound the boundary values."""
    coeffs, residual, cond = solve_coefficients(collocation, sources, s_int)
    tf0 = TestFunction2D(
        s_int=(float(s_int[0]), float(s_int[1])),
        a_int=1.0,
        sources=sources,
        coeffs=coeffs,
    )
    m, M, converged = boundary_extrema(tf0, poly, tol=tol)
    return MfsSolution(
        tf0=tf0,
        residual_report=residual,
        m=m,
        M=M,
        cond_estimate=cond,
        extrema_converged=converged,
    )
