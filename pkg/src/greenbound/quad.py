"""Rigorous integration: singular log-kernel triangles and the source pairing.

The fundamental integral is I = integral over a triangle of
f(x, y) log((x - x0)^2 + (y - y0)^2) with the singular point (x0, y0) at a
vertex.  After translating the singular vertex to the origin and rotating so
the opposite edge lies on the vertical line x' = d (a rotation about the
singular point leaves |x - s| unchanged), the substitution u = x', k = y'/x'
maps the triangle onto the box (0, d) x (k1, k2) and splits the kernel:

    log((x')^2 + (y')^2) = 2 log u + log(1 + k^2).

With a polynomial enclosure f(u, ku) in sum [c_ij] k^i u^j over the box,
both halves integrate in closed form:

  * the log u part uses int_0^a u^(j+1) log u du
    = a^(j+2) ((j+2) log a - 1) / (j+2)^2,
  * the log(1 + k^2) part uses moments int k^i log(1 + k^2) dk computed by
    an integration-by-parts recursion through atan/log antiderivatives.

All moments are assembled in the coupled form (k d)^(i+1) d^(j-i), which
stays bounded for grazing triangles where the raw k range is huge.  A fan
of such triangles over the polygon edges, signed by orientation, evaluates
integrals over the whole polygon for an arbitrary vertex point (inside or
outside), which covers both the evaluation-point kernel and the smooth
exterior-source kernels with one code path.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import expr as _expr
from .errors import DomainError, UnsupportedError
from .fundsol import NEG_INV_4PI, TestFunction2D
from .geometry import Polygon, Triangle
from .interval import Box2, Interval, intersect
from .taylor import TaylorModel2

__all__ = ["QuadConfig", "log_moment", "singular_triangle", "regular_triangle",
           "pair_f_phi", "integrate_source"]


@dataclass(frozen=True)
class QuadConfig:
    """Free parameters of the verified integration engine."""

    tm_degrees: tuple = (8, 8)
    regular_subdiv: int = 16
    tol: float = 1e-10
    fan_splits: int = 1  # angular subdivisions per fan triangle
    max_cells: int = 20000

    def __post_init__(self):
        m, n = self.tm_degrees
        if m < 1 or n < 1:
            raise DomainError("tm_degrees must be at least (1, 1)")
        if self.regular_subdiv < 1 or self.fan_splits < 1:
            raise DomainError("subdivision counts must be >= 1")


def log_moment(a: Interval, j: int) -> Interval:
    """Enclosure of int_0^a u^(j+1) log(u) du for a > 0, j >= 0."""
    if j < 0:
        raise DomainError("log_moment requires j >= 0")
    if a.lo <= 0.0:
        raise DomainError(f"log_moment requires a > 0, got {a}")
    j2 = float(j + 2)
    return a.pow_int(j + 2) * (a.log() * j2 - 1.0) / (j2 * j2)


# ---------------------------------------------------------------------------
# Closed-form k-moments of log(1 + k^2) through y = k d rescaling
# ---------------------------------------------------------------------------


def _k_rational_moments(a: Interval, t: Interval, top: int) -> list:
    """K_i = int_0^t y^i / (a^2 + y^2) dy for i = 0..top (signed in t)."""
    a2 = a.sqr()
    out = [(t / a).atan() / a]
    if top >= 1:
        out.append((a2 + t.sqr()).log() * 0.5 - a.log())
    for i in range(2, top + 1):
        out.append(t.pow_int(i - 1) / float(i - 1) - a2 * out[i - 2])
    return out


def _log_poly_moments(a: Interval, t: Interval, top: int) -> list:
    """A_i = int_0^t y^i log(a^2 + y^2) dy for i = 0..top (signed in t)."""
    ks = _k_rational_moments(a, t, top + 2)
    log_term = (a.sqr() + t.sqr()).log()
    out = []
    for i in range(top + 1):
        i1 = float(i + 1)
        out.append(t.pow_int(i + 1) * log_term / i1 - ks[i + 2] * (2.0 / i1))
    return out


@dataclass(frozen=True)
class _FanFrame:
    """Rotated frame of a triangle (center, v1, v2): the edge (v1, v2) lies
    on the vertical line x' = d and the center at the origin."""

    d: Interval
    y1: Interval
    y2: Interval
    nx: Interval
    ny: Interval
    ex: Interval
    ey: Interval
    sign: float
    cross: Interval


def _fan_frame(center, v1, v2) -> Optional[_FanFrame]:
    cx, cy = Interval.point(float(center[0])), Interval.point(float(center[1]))
    w1x = Interval.point(float(v1[0])) - cx
    w1y = Interval.point(float(v1[1])) - cy
    w2x = Interval.point(float(v2[0])) - cx
    w2y = Interval.point(float(v2[1])) - cy
    cross = w1x * w2y - w1y * w2x
    if cross.lo <= 0.0 <= cross.hi:
        return None  # degenerate or numerically ambiguous orientation
    sign = 1.0 if cross.lo > 0.0 else -1.0
    gx = w2x - w1x
    gy = w2y - w1y
    glen = (gx.sqr() + gy.sqr()).sqrt()
    ex = gx / glen
    ey = gy / glen
    # normal candidate (ey, -ex); distance from center to the edge line
    d1 = ey * w1x - ex * w1y
    d2 = ey * w2x - ex * w2y
    d = intersect(d1, d2)
    nx, ny = ey, -ex
    if d.hi < 0.0:
        d, nx, ny = -d, -nx, -ny
    elif d.lo <= 0.0:
        return None
    y1 = ex * w1x + ey * w1y
    y2 = ex * w2x + ey * w2y
    return _FanFrame(d, y1, y2, nx, ny, ex, ey, sign, cross)


def _sliver_bounds(f: _expr.SourceExpr, center, v1, v2, cross: Interval):
    """Crude but rigorous bounds for a numerically degenerate fan triangle."""
    pts = np.array([center, v1, v2], dtype=float)
    bx = Interval(float(pts[:, 0].min()), float(pts[:, 0].max()))
    by = Interval(float(pts[:, 1].min()), float(pts[:, 1].max()))
    fmag = Interval(0.0, abs(f.eval_interval(bx, by)).hi)
    area = abs(cross) * 0.5
    rmax = math.sqrt(
        max(
            (v1[0] - center[0]) ** 2 + (v1[1] - center[1]) ** 2,
            (v2[0] - center[0]) ** 2 + (v2[1] - center[1]) ** 2,
        )
    )
    if rmax == 0.0:
        return Interval(0.0, 0.0), Interval(0.0, 0.0)
    # |integral f log r^2| <= |f|_inf ( int_{r<1 sector} |log r^2|
    #                                  + area * max(0, log rmax^2) )
    r_cap = Interval.point(min(rmax, 1.0))
    bound = PI * r_cap.sqr() * (1.0 - r_cap.sqr().log())
    if rmax > 1.0:
        bound = bound + area * Interval.point(rmax).sqr().log()
    w = (fmag * bound).hi
    w_plain = (fmag * area).hi
    return Interval(-w, w), Interval(-w_plain, w_plain)


def _fan_moments(
    f: _expr.SourceExpr,
    center,
    v1,
    v2,
    cfg: QuadConfig,
    want_log: bool = True,
    want_plain: bool = False,
):
    """Signed enclosures over the triangle (center, v1, v2) of
    f * log |x - center|^2 (``log``) and of f itself (``plain``)."""
    frame = _fan_frame(center, v1, v2)
    if frame is None:
        cx, cy = Interval.point(float(center[0])), Interval.point(float(center[1]))
        w1x = Interval.point(float(v1[0])) - cx
        w1y = Interval.point(float(v1[1])) - cy
        w2x = Interval.point(float(v2[0])) - cx
        w2y = Interval.point(float(v2[1])) - cy
        cross = w1x * w2y - w1y * w2x
        if cross.lo == 0.0 and cross.hi == 0.0:
            return Interval(0.0, 0.0), Interval(0.0, 0.0)
        return _sliver_bounds(f, center, v1, v2, cross)

    d = frame.d
    logd = d.log()
    m_deg, n_deg = cfg.tm_degrees
    total_log = Interval(0.0, 0.0)
    total_plain = Interval(0.0, 0.0)

    # angular (k-range) subdivision: exact because the frame is shared
    span = frame.y2 - frame.y1
    cuts = [frame.y1]
    for q in range(1, cfg.fan_splits):
        cuts.append(frame.y1 + span * (q / cfg.fan_splits))
    cuts.append(frame.y2)

    dpow = [Interval(1.0, 1.0)]
    for _ in range(n_deg + 2):
        dpow.append(dpow[-1] * d)

    for ya, yb in zip(cuts[:-1], cuts[1:]):
        ka = ya / d
        kb = yb / d
        box = Box2(
            u=Interval(0.0, d.hi),
            k=Interval(min(ka.lo, kb.lo), max(ka.hi, kb.hi)),
        )
        x_tm = TaylorModel2.affine(
            box,
            (m_deg, n_deg),
            const=Interval.point(float(center[0])),
            coef_u=frame.nx,
            coef_ku=frame.ex,
        )
        y_tm = TaylorModel2.affine(
            box,
            (m_deg, n_deg),
            const=Interval.point(float(center[1])),
            coef_u=frame.ny,
            coef_ku=frame.ey,
        )
        tm = _expr.eval_tm(f, x_tm, y_tm)

        # per-i quantities shared across j
        ypow_a = [ya]
        ypow_b = [yb]
        for _ in range(m_deg + 1):
            ypow_a.append(ypow_a[-1] * ya)
            ypow_b.append(ypow_b[-1] * yb)
        s_i = [
            (ypow_b[i] - ypow_a[i]) / float(i + 1) for i in range(m_deg + 1)
        ]
        if want_log:
            la = _log_poly_moments(d, ya, m_deg)
            lb = _log_poly_moments(d, yb, m_deg)
            da_i = [lb[i] - la[i] for i in range(m_deg + 1)]

        for i, j, c in tm.nonzero_terms():
            q = j + 1 - i
            if q >= 0:
                dq = dpow[q]
                base = s_i[i] * dq
            else:
                # fall back to raw k powers (only possible for hand-built models)
                ka_p = ka.pow_int(i + 1)
                kb_p = kb.pow_int(i + 1)
                base = (kb_p - ka_p) / float(i + 1) * dpow[j + 2]
                dq = None
            j2 = float(j + 2)
            if want_plain:
                total_plain = total_plain + c * (base / j2)
            if want_log:
                part1 = base * ((logd * j2 - 1.0) * (2.0 / (j2 * j2)))
                if dq is not None:
                    part2 = (da_i[i] * dq - (logd * base) * 2.0) / j2
                else:
                    part2 = (da_i[i] * dpow[j + 2] / d.pow_int(i + 1)
                             - (logd * base) * 2.0) / j2
                total_log = total_log + c * (part1 + part2)

    sgn = frame.sign
    return total_log * sgn, total_plain * sgn


def singular_triangle(
    f: _expr.SourceExpr, tri: Triangle, cfg: Optional[QuadConfig] = None
) -> Interval:
    """Enclosure of the integral of f(x,y) log((x-x0)^2 + (y-y0)^2) over a
    triangle whose flagged vertex is the singular point (x0, y0).

    The result is the raw log-squared integral; pairing against the 2D
    kernel multiplies by -1/(4 pi) at the assembly level.
    """
    cfg = cfg or QuadConfig()
    if tri.singular_vertex is None:
        raise DomainError("triangle does not flag a singular vertex")
    if f.has_nonsmooth():
        raise UnsupportedError(
            "source uses abs/min/max: not smooth on the triangle"
        )
    sv = tri.singular_vertex
    v = tri.vertices
    center = v[sv]
    v1 = v[(sv + 1) % 3]
    v2 = v[(sv + 2) % 3]
    out, _ = _fan_moments(f, center, v1, v2, cfg, want_log=True, want_plain=False)
    return out


def triangle_source_integral(
    f: _expr.SourceExpr, tri: Triangle, cfg: Optional[QuadConfig] = None
) -> Interval:
    """Enclosure of the plain integral of f over a triangle (moment route)."""
    cfg = cfg or QuadConfig()
    v = tri.vertices
    _, out = _fan_moments(f, v[0], v[1], v[2], cfg, want_log=False, want_plain=True)
    return out


# ---------------------------------------------------------------------------
# Verified integration of a generic box-evaluable integrand over a triangle
# ---------------------------------------------------------------------------


@dataclass(order=True)
class _Cell:
    neg_score: float
    corners: tuple = field(compare=False)  # ((ia, ib, ic) integer barycentric) x 3
    den: int = field(compare=False, default=1)
    value: Interval = field(compare=False, default=None)
    area: Interval = field(compare=False, default=None)


def regular_triangle(
    g: Callable[[Interval, Interval], Interval],
    tri: Triangle,
    cfg: Optional[QuadConfig] = None,
) -> Interval:
    """Enclosure of the integral of g over the triangle for any interval-
    evaluable g.

    Uniform barycentric subdivision into ``regular_subdiv**2`` congruent
    cells, then adaptive 4-way refinement of the worst cells until the
    accumulated width drops under ``tol`` or the cell budget is reached.
    Cell corners carry exact integer barycentric weights, so the rational
    cells tile the triangle exactly and interval corner evaluation makes
    every bounding box a true superset of its cell.
    """
    cfg = cfg or QuadConfig()
    v = tri.vertices
    a, b, c = v[0], v[1], v[2]
    ax, ay = Interval.point(float(a[0])), Interval.point(float(a[1]))
    bx_, by_ = Interval.point(float(b[0])), Interval.point(float(b[1]))
    cx_, cy_ = Interval.point(float(c[0])), Interval.point(float(c[1]))
    cross = (bx_ - ax) * (cy_ - ay) - (by_ - ay) * (cx_ - ax)
    total_area = cross * 0.5

    def cell_value(corners, den: int) -> Interval:
        xs, ys = [], []
        for ia, ib, ic in corners:
            x = (ax * float(ia) + bx_ * float(ib) + cx_ * float(ic)) / float(den)
            y = (ay * float(ia) + by_ * float(ib) + cy_ * float(ic)) / float(den)
            xs.append(x)
            ys.append(y)
        box_x = Interval(min(x.lo for x in xs), max(x.hi for x in xs))
        box_y = Interval(min(y.lo for y in ys), max(y.hi for y in ys))
        return g(box_x, box_y)

    n = cfg.regular_subdiv
    base_area = total_area / float(n * n)
    heap: list[_Cell] = []
    gap = 0.0

    def push(corners, den: int, area: Interval):
        nonlocal gap
        val = cell_value(corners, den)
        score = val.width() * area.hi
        gap += score
        heapq.heappush(heap, _Cell(-score, corners, den, val, area))

    for i in range(n):
        for j in range(n - i):
            k = n - i - j
            push(((k, i, j), (k - 1, i + 1, j), (k - 1, i, j + 1)), n, base_area)
            if i + j < n - 1:
                push(
                    ((k - 1, i + 1, j), (k - 2, i + 1, j + 1), (k - 1, i, j + 1)),
                    n,
                    base_area,
                )

    while len(heap) < cfg.max_cells and gap > cfg.tol:
        worst = heapq.heappop(heap)
        gap -= -worst.neg_score
        if -worst.neg_score <= 0.0:
            heapq.heappush(heap, worst)
            break
        p0, p1, p2 = (tuple(2 * w for w in p) for p in worst.corners)
        den = worst.den * 2
        m01 = tuple((p0[t] + p1[t]) // 2 for t in range(3))
        m12 = tuple((p1[t] + p2[t]) // 2 for t in range(3))
        m20 = tuple((p2[t] + p0[t]) // 2 for t in range(3))
        child_area = worst.area / 4.0
        for corners in (
            (p0, m01, m20),
            (m01, p1, m12),
            (m20, m12, p2),
            (m01, m12, m20),
        ):
            push(corners, den, child_area)

    los, his = [], []
    for cell in heap:
        contrib = cell.value * cell.area
        los.append(contrib.lo)
        his.append(contrib.hi)
    return Interval(
        math.nextafter(math.fsum(los), -math.inf),
        math.nextafter(math.fsum(his), math.inf),
    )


# ---------------------------------------------------------------------------
# The pairing <f, phi> over a polygon
# ---------------------------------------------------------------------------


def _fan_over_polygon(
    f: _expr.SourceExpr,
    center,
    poly: Polygon,
    cfg: QuadConfig,
    want_log: bool,
    want_plain: bool,
):
    """Signed fan of the polygon edges around an arbitrary center point.

    The signed triangle sum reproduces the polygon integral exactly for any
    simple polygon and any center (winding-number argument), so this serves
    interior evaluation points and exterior source points alike.
    """
    total_log = Interval(0.0, 0.0)
    total_plain = Interval(0.0, 0.0)
    for va, vb in poly.edges():
        part_log, part_plain = _fan_moments(
            f, center, va, vb, cfg, want_log=want_log, want_plain=want_plain
        )
        total_log = total_log + part_log
        total_plain = total_plain + part_plain
    return total_log, total_plain


def integrate_source(
    f: _expr.SourceExpr, poly: Polygon, cfg: Optional[QuadConfig] = None
) -> Interval:
    """Enclosure of the integral of f over the polygon."""
    cfg = cfg or QuadConfig()
    if f.has_nonsmooth():
        raise UnsupportedError("source uses abs/min/max: use a smooth split")
    center = poly.vertices.mean(axis=0)
    _, plain = _fan_over_polygon(f, center, poly, cfg, want_log=False, want_plain=True)
    return plain


def pair_f_phi(
    f: _expr.SourceExpr,
    tf: TestFunction2D,
    poly: Polygon,
    cfg: Optional[QuadConfig] = None,
) -> Interval:
    """Rigorous enclosure of the pairing integral of f * phi over the polygon.

    Assembled per kernel: the evaluation-point kernel and every exterior
    source kernel are integrated by the signed singular fan (each kernel's
    own point is a fan vertex, where the machinery is exact), and the
    constant shift contributes shift * integral(f).
    """
    cfg = cfg or QuadConfig()
    if f.has_nonsmooth():
        raise UnsupportedError("source uses abs/min/max: use a smooth split")
    log_int, plain_int = _fan_over_polygon(
        f, tf.s_int, poly, cfg, want_log=True, want_plain=True
    )
    total = log_int * NEG_INV_4PI * tf.a_int + tf.shift * plain_int
    for idx in range(tf.sources.shape[0]):
        coeff = float(tf.coeffs[idx])
        if coeff == 0.0:
            continue
        src_log, _ = _fan_over_polygon(
            f, tf.sources[idx], poly, cfg, want_log=True, want_plain=False
        )
        total = total + src_log * NEG_INV_4PI * coeff
    return total
