import math

import numpy as np
import pytest
import sympy

from greenbound.errors import CertificationError, DomainError
from greenbound.expr import PiecewiseSource1D, parse
from greenbound.interval import Interval
from greenbound.oned import (
    GreenEvaluator,
    GridFunction1D,
    TestFunction1D,
    Verdict,
    build_sub,
    build_super,
    check_sub,
    check_super,
    green_value,
    optimal_constant_bounds,
    sweep,
    sweep_csv,
)

from conftest import assert_contains

ONE = parse("1")
FIVE = parse("5")
JUMP = PiecewiseSource1D((0.25,), (parse("1"), parse("1.125")))


def jump_exact(s, a=0.25, d=0.125):
    """Closed-form solution for f = 1 on (0,a), 1+d on (a,1)."""
    c2 = (1 + d) / 2 + d * a * a / 2
    c1 = c2 - d * a
    c3 = (1 + d) / 2 - c2
    if s < a:
        return -s * s / 2 + c1 * s
    return -(1 + d) * s * s / 2 + c2 * s + c3


class TestGreenValue:
    def test_constant_half(self):
        v = green_value(ONE, 0.5)
        assert_contains(v, 0.125)
        assert v.width() < 1e-13

    def test_constant_profile(self):
        for s in (0.1, 0.25, 0.6, 0.9):
            assert_contains(green_value(ONE, s), s * (1 - s) / 2)

    def test_jump_source(self):
        v = green_value(JUMP, 0.5)
        assert_contains(v, jump_exact(0.5))
        for s in (0.1, 0.25, 0.3, 0.8):
            assert_contains(green_value(JUMP, s), jump_exact(s))

    def test_interval_argument(self):
        v = green_value(ONE, Interval(0.4, 0.6))
        assert_contains(v, 0.125)
        assert_contains(v, 0.4 * 0.6 / 2)

    def test_domain(self):
        with pytest.raises(DomainError):
            green_value(ONE, 1.5)

    def test_trig_source_vs_symbolic(self):
        f = parse("sin(3*x)+2")
        x, s = sympy.symbols("x s", positive=True)
        fs = sympy.sin(3 * x) + 2
        A = sympy.integrate(x * fs, (x, 0, s))
        B = sympy.integrate((1 - x) * fs, (x, s, 1))
        u_sym = sympy.lambdify(s, (1 - s) * A + s * B, "mpmath")
        for sv in (0.12, 0.37, 0.5, 0.81):
            assert_contains(green_value(f, sv), float(u_sym(sv)))

    def test_representation_consistency_polynomial(self):
        """Double-antiderivative oracle at 50 random points."""
        f = parse("x^2 - x + 1")
        x, s = sympy.symbols("x s")
        fs = x**2 - x + 1
        A = sympy.integrate(x * fs, (x, 0, s))
        B = sympy.integrate((1 - x) * fs, (x, s, 1))
        expr = sympy.expand((1 - s) * A + s * B)
        rng = np.random.default_rng(2)
        ev = GreenEvaluator(f)
        for _ in range(50):
            sv = float(rng.uniform(0.01, 0.99))
            want = float(expr.subs(s, sympy.Float(sv, 30)))
            got = ev.u(Interval.point(sv))
            assert got.lo - 1e-13 <= want <= got.hi + 1e-13


class TestHatFunction:
    def test_weight_encloses_inverse(self):
        tf = TestFunction1D.at(0.25)
        assert_contains(tf.a_int, 1.0 / (0.25 * 0.75))

    def test_hat_values(self):
        tf = TestFunction1D.at(0.25)
        assert_contains(tf.hat(Interval.point(0.25)), 1.0)
        assert_contains(tf.hat(Interval.point(0.0)), 0.0)
        assert_contains(tf.hat(Interval.point(1.0)), 0.0)
        assert_contains(tf.hat(Interval.point(0.125)), 0.5)
        spanning = tf.hat(Interval(0.2, 0.3))
        assert_contains(spanning, 1.0)
        assert_contains(spanning, 0.8)

    def test_invariants(self):
        with pytest.raises(DomainError):
            TestFunction1D.at(0.0)
        with pytest.raises(DomainError):
            TestFunction1D(0.5, Interval(3.0, 3.5))  # does not enclose 4


class TestOptimalConstants:
    def test_f1(self):
        m, M = optimal_constant_bounds(ONE, tol=1e-10)
        assert_contains(M, 0.125)
        assert M.width() <= 1e-9
        assert_contains(m, 0.0)

    def test_f5(self):
        m, M = optimal_constant_bounds(FIVE, tol=1e-9)
        assert_contains(M, 0.625)
        assert M.width() <= 1e-8
        assert_contains(m, 0.0)

    def test_no_smaller_constant_passes(self):
        _, M = optimal_constant_bounds(ONE, tol=1e-10)
        c_bad = M.lo - 1e-6
        grid = GridFunction1D(2.0**-3, np.full(9, c_bad), c_bad)
        ev = GreenEvaluator(ONE)
        verdicts = [check_super(grid, ONE, c_bad, i, evaluator=ev) for i in range(8)]
        assert Verdict.VIOLATED in verdicts


class TestChecks:
    def test_exact_plus_c_holds(self):
        h = 2.0**-6
        c = 0.2 * h * h
        n = round(1 / h)
        xs = np.arange(n + 1) * h
        grid = GridFunction1D(h, xs * (1 - xs) / 2 + c, c)
        ev = GreenEvaluator(ONE)
        assert all(
            check_super(grid, ONE, c, i, evaluator=ev) is Verdict.HOLDS
            for i in range(n)
        )

    def test_zero_grid_violated(self):
        grid = GridFunction1D(2.0**-3, np.zeros(9), 0.0)
        ev = GreenEvaluator(ONE)
        for i in range(8):
            assert check_super(grid, ONE, 0.0, i, evaluator=ev) is Verdict.VIOLATED

    def test_constant_above_sup_holds(self):
        grid = GridFunction1D(2.0**-3, np.full(9, 0.2), 0.2)
        ev = GreenEvaluator(ONE)
        assert all(
            check_super(grid, ONE, 0.2, i, evaluator=ev) is Verdict.HOLDS
            for i in range(8)
        )

    def test_negative_c_rejected(self):
        grid = GridFunction1D(0.5, np.zeros(3), 0.0)
        with pytest.raises(DomainError):
            check_super(grid, ONE, -0.1, 0)

    def test_untileable_mesh_rejected(self):
        # 49 * (1/49) rounds below 1.0, so the subintervals cannot tile (0,1)
        with pytest.raises(DomainError):
            build_super(ONE, 1.0 / 49.0, 0.01)


class TestBuild:
    def test_super_dominates_exact(self):
        h = 2.0**-4
        res = build_super(ONE, h, 0.2 * h * h)
        xs = np.arange(len(res.grid.values)) * h
        assert np.all(res.grid.values >= xs * (1 - xs) / 2 - 1e-15)

    def test_large_c_zero_iterations(self):
        res = build_super(ONE, 2.0**-4, 0.13)
        assert res.iterations == 0

    def test_zero_source_sub_immediate(self):
        res = build_sub(parse("0"), 2.0**-3, 0.01)
        assert res.iterations == 0
        assert np.allclose(res.grid.values, -0.01)

    def test_sub_mirror_symmetry(self):
        h, c = 2.0**-4, 0.2 * 2.0**-8
        sub = build_sub(ONE, h, c)
        neg_super = build_super(parse("-(1)"), h, c)
        assert np.allclose(sub.grid.values, -neg_super.grid.values)

    def test_post_hoc_certification(self):
        h = 2.0**-5
        c = 0.2 * h * h
        up = build_super(ONE, h, c)
        lo = build_sub(ONE, h, c)
        ev = GreenEvaluator(ONE)
        n = up.grid.n_intervals
        assert all(
            check_super(up.grid, ONE, c, i, evaluator=ev) is Verdict.HOLDS
            for i in range(n)
        )
        assert all(
            check_sub(lo.grid, ONE, c, i, evaluator=ev) is Verdict.HOLDS
            for i in range(n)
        )

    def test_enclosure_f5(self):
        h = 2.0**-4
        c = 0.2 * 5 * h * h
        up = build_super(FIVE, h, c)
        lo = build_sub(FIVE, h, c)
        xs = np.arange(len(up.grid.values)) * h
        exact = 5 * xs * (1 - xs) / 2
        assert np.all(lo.grid.values <= exact + 1e-14)
        assert np.all(up.grid.values >= exact - 1e-14)

    def test_jump_certified_enclosure(self):
        h = 2.0**-5
        c = 0.2 * 1.125 * h * h
        up = build_super(JUMP, h, c)
        lo = build_sub(JUMP, h, c)
        xs = np.arange(len(up.grid.values)) * h
        exact = np.array([jump_exact(x) for x in xs])
        assert np.all(lo.grid.values <= exact + 1e-14)
        assert np.all(up.grid.values >= exact - 1e-14)

    def test_iteration_cap_raises(self):
        with pytest.raises(CertificationError):
            build_super(ONE, 2.0**-4, 0.0, max_iters=1)


class TestSweep:
    def test_gap_monotone_f1(self):
        rows = sweep(ONE, [2.0**-4, 2.0**-5, 2.0**-6])
        gaps = [r.max_gap for r in rows]
        assert gaps[1] < gaps[0] and gaps[2] < gaps[1]
        csv = sweep_csv(rows)
        assert csv.splitlines()[0] == "h,c,eps,iterations,max_gap"
        assert len(csv.splitlines()) == 4

    def test_custom_rules(self):
        rows = sweep(
            ONE,
            [2.0**-4],
            c_rule=lambda h, sf: 0.3 * h * h,
            eps_rule=lambda h, sf: 0.5 * h,
        )
        assert rows[0].c == 0.3 * 2.0**-8
        assert rows[0].eps == 0.5 * 2.0**-4
