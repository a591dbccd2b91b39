import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate as sci

from greenbound.errors import DomainError, UnsupportedError
from greenbound.expr import parse
from greenbound.fundsol import Kernel, TestFunction2D, gamma
from greenbound.geometry import Polygon, Triangle
from greenbound.interval import Interval
from greenbound.quad import (
    QuadConfig,
    integrate_source,
    log_moment,
    pair_f_phi,
    regular_triangle,
    singular_triangle,
)

from conftest import assert_contains

# I2 closed form for f = 1 on the canonical unit triangle
CANONICAL_LOG_INTEGRAL = float(mp.mpf(-0.5) + (mp.log(2) - 2 + mp.pi / 2) / 2)


def canonical_triangle(scale=1.0):
    return Triangle(
        np.array([[0.0, 0.0], [scale, 0.0], [scale, scale]]), singular_vertex=0
    )


class TestLogMoment:
    def test_exact_values(self):
        assert_contains(log_moment(Interval(1, 1), 0), -0.25)
        assert_contains(log_moment(Interval(1, 1), 1), float(-mp.mpf(1) / 9))

    def test_half(self):
        got = log_moment(Interval(0.5, 0.5), 0)
        want = float(mp.quad(lambda u: u * mp.log(u), [0, mp.mpf("0.5")]))
        assert_contains(got, want)
        assert got.width() < 1e-14

    def test_against_quadrature_random(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            a = float(rng.uniform(0.05, 2.0))
            j = int(rng.integers(0, 9))
            want = mp.quad(lambda u: u ** (j + 1) * mp.log(u), [0, a])
            got = log_moment(Interval.point(a), j)
            assert mp.mpf(got.lo) <= want <= mp.mpf(got.hi)

    def test_domain(self):
        with pytest.raises(DomainError):
            log_moment(Interval(0, 1), 0)
        with pytest.raises(DomainError):
            log_moment(Interval(1, 1), -1)


class TestSingularTriangle:
    def test_canonical_constant(self):
        got = singular_triangle(parse("1"), canonical_triangle())
        assert_contains(got, CANONICAL_LOG_INTEGRAL)
        assert got.width() <= 1e-8

    def test_zero_source(self):
        got = singular_triangle(parse("0"), canonical_triangle())
        assert got.width() <= 1e-15
        assert_contains(got, 0.0)

    def test_scaling_law(self):
        """I(lam) = lam^2 I(1) + lam^2 log(lam^2) * area for f = 1."""
        lam = 0.5
        got = singular_triangle(parse("1"), canonical_triangle(lam))
        want = lam**2 * CANONICAL_LOG_INTEGRAL + lam**2 * math.log(lam**2) * 0.5
        assert_contains(got, want)

    def test_polynomial_vs_dblquad(self):
        f = parse("x^2+y")
        tri = canonical_triangle()
        got = singular_triangle(f, tri)
        want, err = sci.dblquad(
            lambda y, x: (x * x + y) * math.log(x * x + y * y),
            1e-12, 1.0, 0.0, lambda x: x,
        )
        assert got.lo - 10 * err <= want <= got.hi + 10 * err

    def test_general_position_vertex(self):
        # singular vertex away from the origin, oblique triangle
        tri = Triangle(
            np.array([[0.3, -0.2], [1.1, 0.1], [0.6, 0.9]]), singular_vertex=0
        )
        f = parse("1+x*y")
        got = singular_triangle(f, tri)
        want, err = sci.dblquad(
            lambda s, t: _tri_integrand(tri, f, s, t),
            0.0, 1.0, 0.0, lambda t: 1.0 - t,
        )
        assert got.lo - 10 * max(err, 1e-9) <= want <= got.hi + 10 * max(err, 1e-9)

    def test_requires_flag_and_smoothness(self):
        tri = Triangle(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]))
        with pytest.raises(DomainError):
            singular_triangle(parse("1"), tri)
        with pytest.raises(UnsupportedError):
            singular_triangle(parse("abs(x)"), canonical_triangle())

    def test_split_triangle_consistency(self):
        """Two sub-triangles sharing the split edge reproduce the whole."""
        f = parse("x+2")
        whole = singular_triangle(f, canonical_triangle())
        t1 = Triangle(
            np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.5]]), singular_vertex=0
        )
        t2 = Triangle(
            np.array([[0.0, 0.0], [1.0, 0.5], [1.0, 1.0]]), singular_vertex=0
        )
        parts = singular_triangle(f, t1) + singular_triangle(f, t2)
        assert whole.intersects(parts)


def _tri_integrand(tri, f, s, t):
    v = tri.vertices
    p = v[0] + t * (v[1] - v[0]) + s * (v[2] - v[0])
    jac = abs(
        (v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0])
    )
    r2 = (p[0] - v[0][0]) ** 2 + (p[1] - v[0][1]) ** 2
    if r2 == 0.0:
        return 0.0
    return f.eval_point(p[0], p[1]) * math.log(r2) * jac


class TestRegularTriangle:
    def test_area(self):
        tri = Triangle(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
        got = regular_triangle(lambda bx, by: Interval(1, 1), tri,
                               QuadConfig(regular_subdiv=4))
        assert_contains(got, 0.5)
        assert got.width() < 1e-12

    def test_centroid_moment(self):
        tri = Triangle(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
        got = regular_triangle(lambda bx, by: bx, tri,
                               QuadConfig(regular_subdiv=8, max_cells=3000))
        assert_contains(got, 1.0 / 6.0)

    def test_exterior_kernel_vs_oracle(self):
        tri = Triangle(np.array([[0.1, 0.1], [0.9, 0.2], [0.4, 0.8]]))
        k2 = Kernel(2)
        got = regular_triangle(
            lambda bx, by: gamma(k2, (3.0, 0.0), (bx, by)),
            tri,
            QuadConfig(regular_subdiv=8, max_cells=3000),
        )
        want, err = sci.dblquad(
            lambda s, t: _gamma_integrand(tri, s, t), 0.0, 1.0, 0.0,
            lambda t: 1.0 - t,
        )
        assert got.lo - 10 * err <= want <= got.hi + 10 * err


def _gamma_integrand(tri, s, t):
    v = tri.vertices
    p = v[0] + t * (v[1] - v[0]) + s * (v[2] - v[0])
    jac = abs(
        (v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
        - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0])
    )
    r2 = (p[0] - 3.0) ** 2 + p[1] ** 2
    return -math.log(r2) / (4 * math.pi) * jac


class TestIntegrateSource:
    def test_area(self, centered_square, lshape):
        got = integrate_source(parse("1"), centered_square)
        assert_contains(got, 1.0)
        got = integrate_source(parse("1"), lshape)
        assert_contains(got, 3.0)
        assert got.width() < 1e-12

    def test_polynomial(self, centered_square):
        got = integrate_source(parse("(x-0.125)^2+(y-0.25)^3"), centered_square)
        want = float(
            mp.quad(
                lambda x: mp.quad(
                    lambda y: (x - mp.mpf("0.125")) ** 2 + (y - mp.mpf("0.25")) ** 3,
                    [-0.5, 0.5],
                ),
                [-0.5, 0.5],
            )
        )
        assert_contains(got, want)


class TestPairing:
    def test_pure_gamma_square(self, centered_square):
        """<1, Gamma(center, .)> over the centered square via the symmetry
        oracle: 8 canonical triangles scaled by 1/2."""
        tf = TestFunction2D((0.0, 0.0), 1.0, np.zeros((0, 2)), np.zeros(0))
        got = pair_f_phi(parse("1"), tf, centered_square)
        lam = mp.mpf("0.5")
        tri_val = lam**2 * mp.mpf(CANONICAL_LOG_INTEGRAL) + lam**2 * mp.log(
            lam**2
        ) * mp.mpf("0.5")
        want = float(-1 / (4 * mp.pi) * 8 * tri_val)
        assert_contains(got, want)
        assert got.width() < 1e-12

    def test_linearity(self, centered_square):
        tf = TestFunction2D(
            (0.1, 0.0), 1.0, np.array([[2.0, 2.0]]), np.array([0.7]),
            shift=Interval(0.01, 0.01),
        )
        one = pair_f_phi(parse("x+1"), tf, centered_square)
        two = pair_f_phi(parse("2*(x+1)"), tf, centered_square)
        scaled = one * 2.0
        assert two.intersects(scaled)

    def test_fan_split_refinement_overlaps(self, centered_square):
        tf = TestFunction2D((0.0, 0.0), 1.0, np.zeros((0, 2)), np.zeros(0))
        f = parse("x + sin((x+0.5)*y^2)")
        coarse = pair_f_phi(f, tf, centered_square, QuadConfig(fan_splits=1))
        fine = pair_f_phi(f, tf, centered_square, QuadConfig(fan_splits=3))
        assert coarse.intersects(fine)
        assert fine.width() <= coarse.width() + 1e-15

    def test_degree_refinement_overlaps(self, centered_square):
        tf = TestFunction2D((0.2, -0.1), 1.0, np.array([[0.0, 2.0]]),
                            np.array([-1.2]))
        f = parse("exp(x*y)")
        coarse = pair_f_phi(f, tf, centered_square, QuadConfig(tm_degrees=(5, 5)))
        fine = pair_f_phi(f, tf, centered_square, QuadConfig(tm_degrees=(9, 9)))
        assert coarse.intersects(fine)
        assert fine.width() <= coarse.width() + 1e-15

    def test_agreement_with_dblquad_random(self, centered_square):
        """Non-verified adaptive quadrature lands inside every enclosure."""
        rng = np.random.default_rng(42)
        sources = ["1", "x+1", "y^2+x", "2+x*y", "exp(x)"]
        for trial in range(20):
            f = parse(sources[trial % len(sources)])
            s_int = tuple(rng.uniform(-0.3, 0.3, 2))
            src = rng.uniform(1.0, 2.0, (2, 2)) * rng.choice([-1, 1], (2, 2))
            coeffs = rng.uniform(-1, 1, 2)
            shift = float(rng.uniform(-0.1, 0.1))
            tf = TestFunction2D(s_int, 1.0, src, coeffs,
                                shift=Interval.point(shift))
            got = pair_f_phi(f, tf, centered_square)

            def integrand(y, x):
                r2 = (x - s_int[0]) ** 2 + (y - s_int[1]) ** 2
                phi = -math.log(r2) / (4 * math.pi)
                for (sx, sy), a in zip(src, coeffs):
                    phi += -a * math.log((x - sx) ** 2 + (y - sy) ** 2) / (
                        4 * math.pi
                    )
                return f.eval_point(x, y) * (phi + shift)

            want, err = sci.dblquad(integrand, -0.5, 0.5, -0.5, 0.5,
                                    epsabs=1e-9)
            assert got.lo - 10 * max(err, 1e-8) <= want <= got.hi + 10 * max(
                err, 1e-8
            ), (trial, got, want)

    def test_rejects_nonsmooth(self, centered_square):
        tf = TestFunction2D((0.0, 0.0), 1.0, np.zeros((0, 2)), np.zeros(0))
        with pytest.raises(UnsupportedError):
            pair_f_phi(parse("abs(x)"), tf, centered_square)
