"""Self-contained interval arithmetic with outward rounding.

Every operation returns an interval that is guaranteed to contain the exact
real-valued image of its input intervals.  Outward rounding is realized by
next-representable-value nudging after each floating-point operation instead
of switching the hardware rounding mode, so the module is safe under
unrestricted parallel use.

Rounding policy
---------------
* ``+``/``-`` use an error-compensated sum (TwoSum) and nudge an endpoint
  only when the rounded result actually lies on the wrong side, so exact
  endpoint arithmetic stays exact.
* ``*``, ``/`` and ``sqrt`` are correctly rounded by IEEE 754; one ulp of
  outward nudging is a strict bound.
* libm transcendentals (``log``, ``exp``, ``sin``, ``cos``, ``atan``) are
  faithful but not correctly rounded; endpoints are nudged by
  ``_LIBM_ULPS`` ulps to cover the documented error of glibc's libm.
* ``sin``/``cos`` locate interior extrema through a rigorous two-interval
  enclosure of pi, so large arguments are handled correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import DomainError

__all__ = [
    "Interval",
    "Box2",
    "PI",
    "TWO_PI",
    "HALF_PI",
    "arith",
    "elem",
    "hull",
    "intersect",
    "subdivide_min_max",
    "MinMaxResult",
]

_INF = math.inf

# Outward nudging for results of faithful (<= 1 ulp error) libm calls.
_LIBM_ULPS = 2

# Fault-injection hook used by the CLI selftest: when False, all outward
# nudging is disabled, which must make the containment self-checks fail.
_outward_rounding = True


def _set_outward_rounding(enabled: bool) -> None:
    global _outward_rounding
    _outward_rounding = bool(enabled)


def _next_down(x: float) -> float:
    if not _outward_rounding:
        return x
    return math.nextafter(x, -_INF)


def _next_up(x: float) -> float:
    if not _outward_rounding:
        return x
    return math.nextafter(x, _INF)


def _down_n(x: float, n: int) -> float:
    if not _outward_rounding:
        return x
    for _ in range(n):
        x = math.nextafter(x, -_INF)
    return x


def _up_n(x: float, n: int) -> float:
    if not _outward_rounding:
        return x
    for _ in range(n):
        x = math.nextafter(x, _INF)
    return x


def _add_down(a: float, b: float) -> float:
    """Largest float <= a + b (exact when the sum is representable)."""
    s = a + b
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    if err < 0.0:
        return _next_down(s)
    return s


def _add_up(a: float, b: float) -> float:
    s = a + b
    bv = s - a
    err = (a - (s - bv)) + (b - bv)
    if err > 0.0:
        return _next_up(s)
    return s


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] with finite binary64 endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):  # also catches NaN endpoints
            raise DomainError(f"invalid interval endpoints [{self.lo}, {self.hi}]")
        if math.isinf(self.lo) or math.isinf(self.hi):
            raise DomainError(f"unbounded enclosure [{self.lo}, {self.hi}]")

    # -- constructors -------------------------------------------------

    @staticmethod
    def point(v: float) -> "Interval":
        v = float(v)
        return Interval(v, v)

    # -- queries ------------------------------------------------------

    def mid(self) -> float:
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        # Clamp: midpoint of adjacent floats can round outside.
        return min(max(m, self.lo), self.hi)

    def width(self) -> float:
        return self.hi - self.lo

    def mag(self) -> float:
        """sup |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"

    # -- arithmetic ---------------------------------------------------

    @staticmethod
    def _coerce(v) -> "Interval":
        if isinstance(v, Interval):
            return v
        if isinstance(v, (int, float)):
            return Interval.point(float(v))
        return NotImplemented

    def __add__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.lo == 0.0 and o.hi == 0.0:
            return self
        if self.lo == 0.0 and self.hi == 0.0:
            return o
        return Interval(_add_down(self.lo, o.lo), _add_up(self.hi, o.hi))

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if (self.lo == 0.0 and self.hi == 0.0) or (o.lo == 0.0 and o.hi == 0.0):
            return _ZERO
        if o.lo == 1.0 and o.hi == 1.0:
            return self
        if self.lo == 1.0 and self.hi == 1.0:
            return o
        p1 = self.lo * o.lo
        p2 = self.lo * o.hi
        p3 = self.hi * o.lo
        p4 = self.hi * o.hi
        return Interval(_next_down(min(p1, p2, p3, p4)), _next_up(max(p1, p2, p3, p4)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o.lo <= 0.0 <= o.hi:
            raise DomainError(f"division by interval containing zero: {o}")
        q1 = self.lo / o.lo
        q2 = self.lo / o.hi
        q3 = self.hi / o.lo
        q4 = self.hi / o.hi
        return Interval(_next_down(min(q1, q2, q3, q4)), _next_up(max(q1, q2, q3, q4)))

    def __rtruediv__(self, other) -> "Interval":
        o = Interval._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o / self

    # -- elementary functions ------------------------------------------

    def sqr(self) -> "Interval":
        """Tight square: never returns negative lower bound."""
        a, b = abs(self.lo), abs(self.hi)
        lo_m, hi_m = min(a, b), max(a, b)
        hi = _next_up(hi_m * hi_m)
        if self.lo <= 0.0 <= self.hi:
            return Interval(0.0, hi)
        return Interval(max(0.0, _next_down(lo_m * lo_m)), hi)

    def pow_int(self, n: int) -> "Interval":
        if n != int(n):
            raise DomainError(f"pow_int requires an integer exponent, got {n}")
        n = int(n)
        if n < 0:
            return _ONE / self.pow_int(-n)
        if n == 0:
            return _ONE
        # binary exponentiation with a tight square at every step
        result: Optional[Interval] = None
        base = self
        while n > 0:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base.sqr()
        return result

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise DomainError(f"sqrt of interval with negative part: {self}")
        return Interval(
            max(0.0, _next_down(math.sqrt(self.lo))), _next_up(math.sqrt(self.hi))
        )

    def log(self) -> "Interval":
        if self.lo <= 0.0:
            raise DomainError(f"log of interval touching nonpositive reals: {self}")
        return Interval(
            _down_n(math.log(self.lo), _LIBM_ULPS), _up_n(math.log(self.hi), _LIBM_ULPS)
        )

    def exp(self) -> "Interval":
        try:
            lo = max(0.0, _down_n(math.exp(self.lo), _LIBM_ULPS))
            hi = _up_n(math.exp(self.hi), _LIBM_ULPS)
        except OverflowError:
            raise DomainError(f"exp overflow on {self}") from None
        if math.isinf(hi):
            raise DomainError(f"exp overflow on {self}")
        return Interval(lo, hi)

    def atan(self) -> "Interval":
        return Interval(
            _down_n(math.atan(self.lo), _LIBM_ULPS),
            _up_n(math.atan(self.hi), _LIBM_ULPS),
        )

    def __abs__(self) -> "Interval":
        if self.lo >= 0.0:
            return self
        if self.hi <= 0.0:
            return -self
        return Interval(0.0, max(-self.lo, self.hi))

    def _trig_range(self, fn: Callable[[float], float], max_at, min_at) -> "Interval":
        """Range of a 2*pi-periodic function with known critical points.

        ``max_at``/``min_at`` give the interval base point of the critical
        set {base + 2*pi*k}; inclusion is decided conservatively, so an
        uncertain critical point widens the result (sound direction).
        """
        if self.width() >= TWO_PI.hi:
            return Interval(-1.0, 1.0)
        lo = min(_down_n(fn(self.lo), _LIBM_ULPS), _down_n(fn(self.hi), _LIBM_ULPS))
        hi = max(_up_n(fn(self.lo), _LIBM_ULPS), _up_n(fn(self.hi), _LIBM_ULPS))
        if _crit_in(self, max_at):
            hi = 1.0
        if _crit_in(self, min_at):
            lo = -1.0
        return Interval(max(lo, -1.0), min(hi, 1.0))

    def sin(self) -> "Interval":
        return self._trig_range(math.sin, HALF_PI, -HALF_PI)

    def cos(self) -> "Interval":
        return self._trig_range(math.cos, _ZERO, PI)


_ZERO = Interval(0.0, 0.0)
_ONE = Interval(1.0, 1.0)

# math.pi underestimates pi, so [pi, nextafter(pi)] is a rigorous enclosure.
PI = Interval(math.pi, math.nextafter(math.pi, _INF))
TWO_PI = Interval(2.0 * PI.lo, 2.0 * PI.hi)
HALF_PI = Interval(0.5 * PI.lo, 0.5 * PI.hi)


def _crit_in(x: Interval, base: Interval) -> bool:
    """Whether some point of {base + 2*pi*k : k integer} may lie in x."""
    k_lo = math.floor((x.lo - base.hi) / TWO_PI.lo) - 1
    k_hi = math.ceil((x.hi - base.lo) / TWO_PI.lo) + 1
    for k in range(k_lo, k_hi + 1):
        crit = base + TWO_PI * float(k)
        if crit.hi >= x.lo and crit.lo <= x.hi:
            return True
    return False


def hull(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


def intersect(a: Interval, b: Interval) -> Interval:
    """Intersection of two enclosures of the same quantity."""
    lo, hi = max(a.lo, b.lo), min(a.hi, b.hi)
    if lo > hi:
        raise DomainError(f"disjoint enclosures {a} and {b}: rigor violated upstream")
    return Interval(lo, hi)


@dataclass(frozen=True, slots=True)
class Box2:
    """Axis-aligned box in the transformed (u, k) coordinates."""

    u: Interval
    k: Interval


# ---------------------------------------------------------------------------
# String-dispatch front ends
# ---------------------------------------------------------------------------

_ARITH_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "neg": lambda a, _b: -a,
}


def arith(op: str, a: Interval, b: Optional[Interval] = None) -> Interval:
    try:
        fn = _ARITH_OPS[op]
    except KeyError:
        raise DomainError(f"unknown arithmetic op {op!r}") from None
    return fn(a, b)


def elem(fn: str, a: Interval, n: Optional[int] = None) -> Interval:
    if fn == "log":
        return a.log()
    if fn == "sqrt":
        return a.sqrt()
    if fn == "sin":
        return a.sin()
    if fn == "cos":
        return a.cos()
    if fn == "exp":
        return a.exp()
    if fn == "abs":
        return abs(a)
    if fn == "pow_int":
        if n is None:
            raise DomainError("pow_int requires an exponent")
        return a.pow_int(n)
    raise DomainError(f"unknown elementary function {fn!r}")


# ---------------------------------------------------------------------------
# Rigorous range bounding over an interval domain
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class MinMaxResult:
    m: Interval  # encloses inf g over the domain
    M: Interval  # encloses sup g over the domain
    converged: bool
    evaluations: int
    depth: int


@dataclass(slots=True)
class _BoxState:
    lo: float
    hi: float
    glo: float
    ghi: float


def subdivide_min_max(
    g: Callable[[Interval], Interval],
    domain: Interval,
    tol: float = 1e-12,
    max_depth: int = 40,
    g_prime: Optional[Callable[[Interval], Interval]] = None,
    max_boxes: int = 20000,
) -> MinMaxResult:
    """Rigorous enclosures of inf g and sup g over ``domain``.

    Branch-and-bound over subintervals of the domain with interval
    evaluation.  When ``g_prime`` (an interval extension of g') is given,
    two accelerations apply: sign-definite derivative finalizes a box by
    its endpoint values, and a mean-value-form evaluation tightens the
    natural extension.  Both the true infimum and supremum are contained
    in the returned ``m`` and ``M``; ``converged`` reports whether both
    widths reached ``tol`` within the depth/box budget.
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    evals = 0

    def eval_box(lo: float, hi: float) -> Interval:
        nonlocal evals
        evals += 1
        return g(Interval(lo, hi))

    # point-evaluation bounds: best certified function values
    best_lo_of_sup = -_INF  # some point with g >= this
    best_hi_of_inf = _INF  # some point with g <= this

    def eval_point(t: float) -> None:
        nonlocal best_lo_of_sup, best_hi_of_inf
        v = eval_box(t, t)
        best_lo_of_sup = max(best_lo_of_sup, v.lo)
        best_hi_of_inf = min(best_hi_of_inf, v.hi)

    # contributions of finalized (monotone or dropped) boxes
    final_sup = -_INF
    final_inf = _INF

    def make_state(lo: float, hi: float) -> Optional[_BoxState]:
        """Evaluate a box; return None when it was finalized in place."""
        nonlocal best_lo_of_sup, best_hi_of_inf, final_sup, final_inf
        v = eval_box(lo, hi)
        glo, ghi = v.lo, v.hi
        if g_prime is not None and lo < hi:
            dv = g_prime(Interval(lo, hi))
            if dv.lo > 0.0 or dv.hi < 0.0:
                # strictly monotone: extrema sit at the box endpoints
                va = eval_box(lo, lo)
                vb = eval_box(hi, hi)
                best_lo_of_sup = max(best_lo_of_sup, va.lo, vb.lo)
                best_hi_of_inf = min(best_hi_of_inf, va.hi, vb.hi)
                final_sup = max(final_sup, va.hi, vb.hi)
                final_inf = min(final_inf, va.lo, vb.lo)
                return None
            mid = Interval(lo, hi).mid()
            vm = eval_box(mid, mid)
            best_lo_of_sup = max(best_lo_of_sup, vm.lo)
            best_hi_of_inf = min(best_hi_of_inf, vm.hi)
            mv = vm + dv * Interval(lo - mid, hi - mid)
            glo = max(glo, mv.lo)
            ghi = min(ghi, mv.hi)
            if glo > ghi:  # both enclose the same nonempty range
                glo, ghi = v.lo, v.hi
        return _BoxState(lo, hi, glo, ghi)

    eval_point(domain.lo)
    eval_point(domain.hi)
    eval_point(domain.mid())

    if domain.lo == domain.hi:
        v = eval_box(domain.lo, domain.hi)
        return MinMaxResult(m=v, M=v, converged=True, evaluations=evals, depth=0)

    root = make_state(domain.lo, domain.hi)
    active = [] if root is None else [root]
    depth = 0
    converged = False

    while depth < max_depth:
        sup_hi = max([final_sup, best_lo_of_sup] + [s.ghi for s in active])
        inf_lo = min([final_inf, best_hi_of_inf] + [s.glo for s in active])
        if (sup_hi - best_lo_of_sup) <= tol and (best_hi_of_inf - inf_lo) <= tol:
            converged = True
            break
        if not active:
            break
        depth += 1
        nxt: list[_BoxState] = []
        for s in active:
            # prune: box cannot sharpen either bound
            if s.ghi <= best_lo_of_sup and s.glo >= best_hi_of_inf:
                continue
            mid = Interval(s.lo, s.hi).mid()
            if mid <= s.lo or mid >= s.hi:
                final_sup = max(final_sup, s.ghi)
                final_inf = min(final_inf, s.glo)
                continue
            eval_point(mid)
            for a, b in ((s.lo, mid), (mid, s.hi)):
                child = make_state(a, b)
                if child is None:
                    continue
                if child.ghi <= best_lo_of_sup and child.glo >= best_hi_of_inf:
                    continue
                nxt.append(child)
        if len(nxt) > max_boxes:
            nxt.sort(key=lambda s: max(s.ghi - best_lo_of_sup, best_hi_of_inf - s.glo))
            for s in nxt[: len(nxt) - max_boxes]:
                final_sup = max(final_sup, s.ghi)
                final_inf = min(final_inf, s.glo)
            nxt = nxt[len(nxt) - max_boxes :]
        active = nxt

    sup_hi = max([final_sup, best_lo_of_sup] + [s.ghi for s in active])
    inf_lo = min([final_inf, best_hi_of_inf] + [s.glo for s in active])
    if not converged:
        converged = (sup_hi - best_lo_of_sup) <= tol and (
            best_hi_of_inf - inf_lo
        ) <= tol
    return MinMaxResult(
        m=Interval(inf_lo, best_hi_of_inf),
        M=Interval(best_lo_of_sup, sup_hi),
        converged=converged,
        evaluations=evals,
        depth=depth,
    )
