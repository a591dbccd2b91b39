"""2D pointwise enclosure engine: sign handling, pipeline orchestration.

For a certified-nonnegative source the enclosure at an interior point s is

    pair(f, phi_lower) / a_int  <=  u(s)  <=  pair(f, phi_upper) / a_int,

with the shifted test-function pair built from one MFS candidate per
evaluation point.  Mixed-sign sources are handled through a user-supplied
decomposition f = f_plus - f_minus into certified-nonnegative parts; the
two sub-problems share the same test functions (they depend only on the
geometry and the evaluation point), and linearity combines the bounds.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import mfs as _mfs
from .errors import DomainError, GeometryError, InputError, NeedsSplitError
from .expr import Bin, Neg, Num, SourceExpr
from .geometry import CornerRefine, PointSet, Polygon, Triangle, \
    amano_sources, discretize_boundary, _ear_clip
from .interval import Interval
from .quad import QuadConfig, pair_f_phi

__all__ = [
    "MfsConfig",
    "SignVerdict",
    "SignedSplit",
    "shift_split",
    "certify_sign",
    "EnclosureResult",
    "enclose_point",
    "enclose_batch",
    "batch_csv",
]


@dataclass(frozen=True)
class MfsConfig:
    """Collocation/source placement and boundary-bounding parameters."""

    n: int = 69
    R_far: float = 1.2
    R_near: float = 1.05
    corner: Optional[tuple] = None  # reentrant corner getting refined spacing
    corner_radius: float = 0.1  # sup-norm radius of the near-corner R rule
    refine_ratio: float = 0.7
    tol: float = 1e-9

    def r_rule(self):
        corner = self.corner

        def rule(x) -> float:
            if corner is not None and (
                abs(x[0] - corner[0]) <= self.corner_radius
                and abs(x[1] - corner[1]) <= self.corner_radius
            ):
                return self.R_near
            return self.R_far

        return rule


class SignVerdict(enum.Enum):
    NONNEGATIVE = "nonnegative"
    NONPOSITIVE = "nonpositive"
    MIXED = "mixed"
    UNDECIDED = "undecided"


def certify_sign(
    f: SourceExpr, poly: Polygon, max_boxes: int = 4000
) -> SignVerdict:
    """Rigorous sign verdict of f over the polygon.

    Bounds f over a recursive subdivision of a triangulation, using the
    bounding box of each cell (a superset of the cell, so the verdict is
    conservative and never wrongly sign-definite).  Cell centroids, always
    interior points, serve as witnesses for the ``mixed`` verdict.
    """
    tris = [Triangle(np.array([poly.vertices[i] for i in t]))
            for t in _ear_clip(poly)]
    queue = [tuple(map(tuple, t.vertices)) for t in tris]
    has_pos = has_neg = False
    all_nonneg = all_nonpos = True
    exhausted = False
    boxes = 0
    while queue:
        tri = queue.pop()
        boxes += 1
        (ax, ay), (bx, by), (cx, cy) = tri
        gx = Interval(min(ax, bx, cx), max(ax, bx, cx))
        gy = Interval(min(ay, by, cy), max(ay, by, cy))
        rng = f.eval_interval(gx, gy)
        mx, my = (ax + bx + cx) / 3.0, (ay + by + cy) / 3.0
        witness = f.eval_interval(Interval.point(mx), Interval.point(my))
        has_pos = has_pos or witness.lo > 0.0
        has_neg = has_neg or witness.hi < 0.0
        if has_pos and has_neg:
            return SignVerdict.MIXED
        if rng.lo >= 0.0 or rng.hi <= 0.0:
            all_nonneg = all_nonneg and rng.lo >= 0.0
            all_nonpos = all_nonpos and rng.hi <= 0.0
            continue
        if boxes >= max_boxes:
            exhausted = True
            break
        m01 = ((ax + bx) / 2, (ay + by) / 2)
        m12 = ((bx + cx) / 2, (by + cy) / 2)
        m20 = ((cx + ax) / 2, (cy + ay) / 2)
        queue.extend(
            ((tri[0], m01, m20), (m01, tri[1], m12), (m20, m12, tri[2]),
             (m01, m12, m20))
        )
    if exhausted:
        return SignVerdict.MIXED if (has_pos and has_neg) else SignVerdict.UNDECIDED
    if all_nonneg:
        return SignVerdict.NONNEGATIVE
    if all_nonpos:
        return SignVerdict.NONPOSITIVE
    return SignVerdict.MIXED if (has_pos and has_neg) else SignVerdict.UNDECIDED


@dataclass(frozen=True)
class SignedSplit:
    """Decomposition f = f_plus - f_minus with both parts >= 0 on the domain.

    The library verifies a user-supplied split (sign certification of both
    parts plus a sampled identity check) but never invents one."""

    f_plus: SourceExpr
    f_minus: SourceExpr

    def verify(self, f: SourceExpr, poly: Polygon, samples: int = 400) -> None:
        for part, name in ((self.f_plus, "plus"), (self.f_minus, "minus")):
            verdict = certify_sign(part, poly)
            if verdict is not SignVerdict.NONNEGATIVE:
                raise InputError(
                    f"split part {name!r} not certified nonnegative ({verdict.value})"
                )
        rng = np.random.default_rng(20240905)
        v = poly.vertices
        lo = v.min(axis=0)
        hi = v.max(axis=0)
        scale = max(1.0, _magnitude_scale(f, poly))
        checked = 0
        while checked < samples:
            p = lo + rng.random(2) * (hi - lo)
            if not poly.contains_strict(p):
                continue
            checked += 1
            lhs = f.eval_point(p[0], p[1])
            rhs = self.f_plus.eval_point(p[0], p[1]) - self.f_minus.eval_point(
                p[0], p[1]
            )
            if abs(lhs - rhs) > 1e-9 * scale:
                raise InputError(
                    f"split identity violated at {tuple(p)}: f={lhs}, "
                    f"plus-minus={rhs}"
                )


def _magnitude_scale(f: SourceExpr, poly: Polygon) -> float:
    v = poly.vertices
    gx = Interval(float(v[:, 0].min()), float(v[:, 0].max()))
    gy = Interval(float(v[:, 1].min()), float(v[:, 1].max()))
    try:
        return abs(f.eval_interval(gx, gy)).hi
    except DomainError:
        return 1.0


def shift_split(f: SourceExpr, offset: float) -> SignedSplit:
    """The canonical split (f + offset) - offset, exact by construction."""
    if offset < 0.0:
        raise InputError("shift offset must be nonnegative")
    k = Num(float(offset), float(offset), float(offset))
    plus = SourceExpr(Bin("+", f.root, k), f"({f.text})+{offset!r}")
    minus = SourceExpr(k, f"{offset!r}")
    return SignedSplit(plus, minus)


@dataclass(frozen=True)
class EnclosureResult:
    s_int: tuple
    bound: Interval
    width: float
    rel_error: float
    diagnostics: dict = field(default_factory=dict)

    @staticmethod
    def from_bound(s_int, bound: Interval, diagnostics: dict) -> "EnclosureResult":
        width = bound.width()
        mid = bound.mid()
        rel = math.inf if mid == 0.0 else width / abs(mid)
        return EnclosureResult(
            s_int=(float(s_int[0]), float(s_int[1])),
            bound=bound,
            width=width,
            rel_error=rel,
            diagnostics=diagnostics,
        )


def _build_test_functions(poly: Polygon, s_int, cfg: MfsConfig):
    refine = None
    if cfg.corner is not None:
        refine = CornerRefine(corner=cfg.corner, ratio=cfg.refine_ratio)
    collocation = discretize_boundary(poly, cfg.n, refine)
    sources = amano_sources(poly, collocation, cfg.r_rule())
    pts = PointSet(collocation, sources)
    pts.validate(poly)
    sol = _mfs.solve(poly, pts.collocation, pts.sources, s_int, tol=cfg.tol)
    phi_upper, phi_lower = _mfs.make_enclosure_pair(sol)
    return sol, phi_upper, phi_lower


def _bounds_nonneg(f, phi_upper, phi_lower, poly, quad_cfg, a_int) -> Interval:
    """Enclosure of u(s) for certified f >= 0."""
    a = Interval.point(float(a_int))
    upper = pair_f_phi(f, phi_upper, poly, quad_cfg) / a
    lower = pair_f_phi(f, phi_lower, poly, quad_cfg) / a
    if lower.lo > upper.hi:
        raise DomainError("crossed enclosure; rigor violated upstream")
    return Interval(lower.lo, upper.hi)


def enclose_point(
    poly: Polygon,
    f: SourceExpr,
    s_int,
    split: Optional[SignedSplit] = None,
    mfs_cfg: Optional[MfsConfig] = None,
    quad_cfg: Optional[QuadConfig] = None,
) -> EnclosureResult:
    """Rigorous enclosure of u(s_int) for -Laplace(u) = f, zero boundary data.

    f must be certified nonnegative or nonpositive, or a verified
    SignedSplit must be supplied; each evaluation point triggers its own
    MFS solve.
    """
    mfs_cfg = mfs_cfg or MfsConfig()
    quad_cfg = quad_cfg or QuadConfig()
    if poly.locate(s_int) != 1:
        raise GeometryError(f"evaluation point {tuple(s_int)} must be interior")

    verdict = None
    if split is not None:
        split.verify(f, poly)
    else:
        verdict = certify_sign(f, poly)
        if verdict in (SignVerdict.MIXED, SignVerdict.UNDECIDED):
            raise NeedsSplitError(
                f"source sign is {verdict.value}; supply a SignedSplit "
                "(e.g. shift_split(f, K) with f + K >= 0)"
            )

    sol, phi_upper, phi_lower = _build_test_functions(poly, s_int, mfs_cfg)
    diagnostics = {
        "mfs_residual": sol.residual_report,
        "mfs_condition": sol.cond_estimate,
        "m": (sol.m.lo, sol.m.hi),
        "M": (sol.M.lo, sol.M.hi),
        "extrema_converged": sol.extrema_converged,
        "n_collocation": mfs_cfg.n,
        "sign": verdict.value if verdict is not None else "split",
    }
    a_int = sol.tf0.a_int
    if split is not None:
        u_plus = _bounds_nonneg(split.f_plus, phi_upper, phi_lower, poly,
                                quad_cfg, a_int)
        u_minus = _bounds_nonneg(split.f_minus, phi_upper, phi_lower, poly,
                                 quad_cfg, a_int)
        bound = u_plus - u_minus
    elif verdict is SignVerdict.NONNEGATIVE:
        bound = _bounds_nonneg(f, phi_upper, phi_lower, poly, quad_cfg, a_int)
    else:  # nonpositive: u = -(solution for -f)
        neg = SourceExpr(Neg(f.root), f"-({f.text})")
        bound = -_bounds_nonneg(neg, phi_upper, phi_lower, poly, quad_cfg, a_int)
    return EnclosureResult.from_bound(s_int, bound, diagnostics)


# ---------------------------------------------------------------------------
# Batch driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatchItem:
    point: tuple
    result: Optional[EnclosureResult]
    error: Optional[str] = None
    needs_split: bool = False


def _batch_worker(args) -> BatchItem:
    (vertices, f_text, split_texts, point, mfs_cfg, quad_cfg) = args
    from .expr import parse

    poly = Polygon(vertices)
    f = parse(f_text)
    split = None
    if split_texts is not None:
        split = SignedSplit(parse(split_texts[0]), parse(split_texts[1]))
    try:
        res = enclose_point(poly, f, point, split=split, mfs_cfg=mfs_cfg,
                            quad_cfg=quad_cfg)
        return BatchItem(point=tuple(point), result=res)
    except NeedsSplitError as e:
        return BatchItem(point=tuple(point), result=None, error=str(e),
                         needs_split=True)
    except Exception as e:  # per-point failures recorded, batch continues
        return BatchItem(point=tuple(point), result=None, error=str(e))


def enclose_batch(
    poly: Polygon,
    f: SourceExpr,
    points,
    split: Optional[SignedSplit] = None,
    mfs_cfg: Optional[MfsConfig] = None,
    quad_cfg: Optional[QuadConfig] = None,
    threads: int = 1,
) -> list:
    """Independent enclosures for a list of interior points.

    Each point runs the full pipeline (the candidate test function depends
    on the evaluation point); per-point errors are recorded and the batch
    continues.  Results keep the input order regardless of thread count.
    """
    mfs_cfg = mfs_cfg or MfsConfig()
    quad_cfg = quad_cfg or QuadConfig()
    split_texts = None
    if split is not None:
        split_texts = (split.f_plus.text, split.f_minus.text)
    jobs = [
        (
            np.asarray(poly.vertices).tolist(),
            f.text,
            split_texts,
            (float(p[0]), float(p[1])),
            mfs_cfg,
            quad_cfg,
        )
        for p in points
    ]
    if threads <= 1 or len(jobs) <= 1:
        return [_batch_worker(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_batch_worker, jobs))


def batch_csv(items) -> str:
    """CSV with the fixed column contract; failed points are omitted."""
    lines = ["point_x,point_y,lower,upper,width,rel_error"]
    for item in items:
        if item.result is None:
            continue
        r = item.result
        rel = "inf" if math.isinf(r.rel_error) else repr(r.rel_error)
        lines.append(
            f"{r.s_int[0]!r},{r.s_int[1]!r},{r.bound.lo!r},{r.bound.hi!r},"
            f"{r.width!r},{rel}"
        )
    return "\n".join(lines) + "\n"
