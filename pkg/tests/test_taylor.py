import math
import random

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenbound.errors import DomainError, UnsupportedError
from greenbound.expr import parse
from greenbound.interval import Box2, Interval
from greenbound.taylor import TaylorModel2, tm_arith, tm_compose_elem, tm_from_expr

from conftest import assert_contains


def box(u_hi=0.5, k_lo=0.0, k_hi=1.0):
    return Box2(Interval(0.0, u_hi), Interval(k_lo, k_hi))


def sample_ok(tm, fn, n=100, seed=0):
    """fn(u, k) must lie inside the model evaluation at (u, k)."""
    rng = random.Random(seed)
    for _ in range(n):
        u = rng.uniform(tm.box.u.lo, tm.box.u.hi)
        k = rng.uniform(tm.box.k.lo, tm.box.k.hi)
        val = fn(u, k)
        enc = tm.eval(Interval.point(u), Interval.point(k))
        assert enc.lo <= val <= enc.hi, (u, k, val, enc)


class TestConstruction:
    def test_constant_one(self):
        tm = tm_from_expr(parse("1"), box(), (8, 8))
        assert tm.coefficient(0, 0) == Interval(1, 1)
        assert sum(1 for _ in tm.nonzero_terms()) == 1

    def test_linear_exact(self):
        tm = tm_from_expr(parse("x+y"), box(), (4, 4))
        assert_contains(tm.coefficient(0, 1), 1.0)  # u term
        assert_contains(tm.coefficient(1, 1), 1.0)  # ku term
        assert tm.coefficient(0, 0).width() == 0.0

    def test_sin_xy_enclosure(self):
        tm = tm_from_expr(parse("sin(x*y)"), box(0.5, 0.0, 1.0), (4, 4))
        sample_ok(tm, lambda u, k: float(mp.sin(mp.mpf(u) * (k * u))))

    def test_nonsmooth_rejected(self):
        with pytest.raises(UnsupportedError):
            tm_from_expr(parse("abs(x)"), box(), (4, 4))


class TestArith:
    def test_add_encloses_sum(self):
        f, g = parse("x^2"), parse("sin(y)")
        a = tm_from_expr(f, box(), (6, 6))
        b = tm_from_expr(g, box(), (6, 6))
        s = tm_arith("add", a, b)
        sample_ok(s, lambda u, k: u * u + float(mp.sin(k * u)))

    def test_mul_truncation_sound(self):
        # (1 + u)^6 at degrees (2, 2): truncated but still an enclosure
        base = tm_from_expr(parse("1+x"), box(0.5), (2, 2))
        p = base.pow_int(6)
        sample_ok(p, lambda u, k: (1 + u) ** 6)

    def test_division(self):
        tm = tm_from_expr(parse("1/(2+x)"), box(0.5), (6, 6))
        sample_ok(tm, lambda u, k: 1.0 / (2.0 + u))

    def test_box_mismatch(self):
        a = tm_from_expr(parse("x"), box(0.5), (4, 4))
        b = tm_from_expr(parse("x"), box(0.25), (4, 4))
        with pytest.raises(DomainError):
            tm_arith("add", a, b)


class TestCompose:
    def test_exp_of_zero(self):
        zero = TaylorModel2.constant(Interval(0, 0), box(), (4, 4))
        e = tm_compose_elem("exp", zero)
        assert_contains(e.range_enclosure(), 1.0)

    def test_sin_of_u(self):
        tm = tm_compose_elem("sin", TaylorModel2.variable_u(box(1.0), (8, 8)))
        enc = tm.eval(Interval.point(0.3), Interval.point(0.5))
        assert_contains(enc, float(mp.sin(mp.mpf("0.3"))))
        # Lagrange remainder at order 8 over [0,1]: (1/2)^9/9! ~ 5e-9
        assert enc.width() < 1e-7

    def test_log_requires_positive_range(self):
        tm = TaylorModel2.variable_u(box(1.0), (4, 4))
        with pytest.raises(DomainError):
            tm_compose_elem("log", tm)

    def test_sqrt(self):
        tm = tm_compose_elem(
            "sqrt", TaylorModel2.variable_u(box(1.0), (8, 8)) + Interval(4.0, 4.0)
        )
        sample_ok(tm, lambda u, k: math.sqrt(4.0 + u))


_EXPRS = [
    "1", "x", "y", "x+y", "x*y", "x^2-y^3", "sin(x)", "cos(x*y)",
    "exp(x-y)", "x*sin(y)+1", "(x+2)*(y-3)", "1/(x+3)",
]


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(_EXPRS),
    st.floats(0.1, 1.0),
    st.floats(-1.0, 0.0),
    st.floats(0.1, 1.0),
)
def test_enclosure_property_grid(text, u_hi, k_lo, k_span):
    """Spec invariant: 30x30 sample grid lies inside every constructed model."""
    f = parse(text)
    b = Box2(Interval(0.0, u_hi), Interval(k_lo, k_lo + k_span))
    tm = tm_from_expr(f, b, (8, 8))
    for i in range(30):
        for j in range(30):
            u = b.u.lo + (b.u.hi - b.u.lo) * i / 29
            k = b.k.lo + (b.k.hi - b.k.lo) * j / 29
            val = f.eval_point(u, k * u)
            enc = tm.eval(Interval.point(u), Interval.point(k))
            assert enc.lo <= val <= enc.hi


def test_degree_increase_keeps_enclosure_and_shrinks():
    f = parse("sin(x*y)+exp(x)")
    b = box(0.5)
    widths = []
    for deg in (4, 6, 8):
        tm = tm_from_expr(f, b, (deg, deg))
        sample_ok(tm, lambda u, k: float(mp.sin(mp.mpf(u) * k * u) + mp.exp(mp.mpf(u))), n=40)
        widths.append(tm.range_enclosure().width())
    assert widths[2] <= widths[0] + 1e-12
