import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stabilis.fpcore import Precision, fl, to_exact
from stabilis.reals import CertifiedReal, exp_iv
from stabilis.relmetric import (
    DimensionMismatch,
    InfiniteDistanceError,
    RelPoint,
    abs_dist,
    geodesic_point,
    rel_ball_sample,
    rel_dist,
    rel_sphere_sample,
)

LOG2 = 0.6931471805599453


def coords(min_dim=1, max_dim=4):
    nonzero = st.fractions(
        min_value=Fraction(1, 10**6), max_value=Fraction(10**6), max_denominator=10**6
    )
    signed = st.tuples(nonzero, st.sampled_from([-1, 1])).map(lambda p: p[0] * p[1])
    return st.lists(signed, min_size=min_dim, max_size=max_dim)


class TestRelDist:
    def test_unit_to_e(self):
        e = CertifiedReal(lambda b: exp_iv(Fraction(1), b))
        d = rel_dist(RelPoint.of(1), RelPoint.of(e))
        assert abs(d - 1) < Fraction(1, 10**40)

    def test_product_metric_of_doublings(self):
        d = rel_dist(RelPoint.of(1, 2), RelPoint.of(2, 4))
        assert abs(float(d) - math.sqrt(2) * LOG2) < 1e-15

    def test_opposite_signs_infinite(self):
        assert rel_dist(RelPoint.of(1), RelPoint.of(-1)) == math.inf

    def test_zero_coordinate_matching(self):
        assert rel_dist(RelPoint.of(0, 1), RelPoint.of(0, 1)) == 0
        assert rel_dist(RelPoint.of(0, 1), RelPoint.of(1, 1)) == math.inf

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            rel_dist(RelPoint.of(1), RelPoint.of(1, 2))

    @given(coords(), coords(), coords())
    @settings(max_examples=100, deadline=None)
    def test_metric_axioms(self, a, b, c):
        n = min(len(a), len(b), len(c))
        x, y, z = RelPoint(a[:n]), RelPoint(b[:n]), RelPoint(c[:n])
        # force one component by matching signs to x
        y = RelPoint([v if sx == (1 if v > 0 else -1) else -v for v, sx in zip(y.coords, x.pattern)])
        z = RelPoint([v if sx == (1 if v > 0 else -1) else -v for v, sx in zip(z.coords, x.pattern)])
        dxy, dyx = rel_dist(x, y), rel_dist(y, x)
        assert abs(dxy - dyx) < Fraction(1, 2**100)
        assert rel_dist(x, x) == 0
        if x.coords != y.coords:
            assert dxy > 0
        slack = Fraction(1, 2**100)
        assert rel_dist(x, z) <= dxy + rel_dist(y, z) + slack

    @given(coords(min_dim=2, max_dim=5))
    @settings(max_examples=50, deadline=None)
    def test_product_metric_identity(self, a):
        b = [v * Fraction(3, 2) if i % 2 == 0 else v for i, v in enumerate(a)]
        x, y = RelPoint(a), RelPoint(b)
        total = sum(rel_dist(RelPoint.of(p), RelPoint.of(q)) ** 2 for p, q in zip(a, b))
        d = rel_dist(x, y)
        assert abs(d * d - total) < Fraction(1, 2**80)

    @given(coords(min_dim=1, max_dim=6), st.sampled_from([3, 11, 24, 53]))
    @settings(max_examples=60, deadline=None)
    def test_rounding_stays_within_metric_bound(self, a, t):
        # dist(x, fl(x)) < 2 sqrt(d) u, compared in squared (exact) form
        x = RelPoint(a)
        rounded = RelPoint([to_exact(fl(c, t)) for c in a])
        u = Precision(t).u
        d = rel_dist(x, rounded)
        assert d * d < 4 * len(a) * u * u


class TestGeodesic:
    def test_log_midpoint(self):
        z = geodesic_point(RelPoint.of(1), RelPoint.of(4), Fraction(1, 2))
        assert z.coords[0] == 2

    def test_endpoint_parameters(self):
        x, y = RelPoint.of(3, 5), RelPoint.of(6, 5)
        assert geodesic_point(x, y, 0) is x
        assert geodesic_point(x, y, 1) is y

    def test_infinite_pair_rejected(self):
        with pytest.raises(InfiniteDistanceError):
            geodesic_point(RelPoint.of(1), RelPoint.of(-1), Fraction(1, 2))

    @given(coords(min_dim=1, max_dim=3), st.fractions(min_value=0, max_value=1, max_denominator=64))
    @settings(max_examples=50, deadline=None)
    def test_proportional_distance(self, a, s):
        x = RelPoint(a)
        y = RelPoint([v * Fraction(7, 3) for v in a])
        z = geodesic_point(x, y, s)
        dxz, dxy = rel_dist(x, z), rel_dist(x, y)
        assert abs(dxz - s * dxy) < Fraction(1, 2**60)

    @given(st.fractions(min_value=0, max_value=1, max_denominator=32))
    @settings(max_examples=30, deadline=None)
    def test_additivity_along_the_curve(self, s):
        x, y = RelPoint.of(2, 9), RelPoint.of(5, 1)
        z = geodesic_point(x, y, s)
        lhs = rel_dist(x, z) + rel_dist(z, y)
        assert abs(lhs - rel_dist(x, y)) < Fraction(1, 2**60)


class TestAbsDist:
    def test_unit_square_diagonal(self):
        assert abs(abs_dist(RelPoint.of(1, 0), RelPoint.of(0, 1)) ** 2 - 2) < Fraction(1, 2**100)

    def test_identity(self):
        assert abs_dist(RelPoint.of(3, 4), RelPoint.of(3, 4)) == 0

    def test_strassen_matrices_at_eps_tenth(self):
        eps = Fraction(1, 10)
        a = RelPoint.of(1, eps, eps, 1)
        c = RelPoint.of(1 + eps**2, 2 * eps, 2 * eps, 1 + eps**2)
        expected = 2 * eps**2 + 2 * eps**4
        d = abs_dist(a, c)
        assert abs(d * d - expected) < Fraction(1, 2**100)
        assert abs(float(d) - 0.14212670403551895) < 1e-15


class TestBallSampling:
    def test_within_radius_and_component(self):
        x = RelPoint.of(2, -3, Fraction(1, 7))
        r = Fraction(1, 4)
        pts = rel_ball_sample(x, r, 24, seed=11)
        assert len(pts) == 24
        for y in pts:
            assert y.pattern == x.pattern
            assert rel_dist(x, y) <= r

    def test_zero_point_ball_is_trivial(self):
        z = RelPoint.of(0, 0)
        pts = rel_ball_sample(z, Fraction(1, 2), 5, seed=3)
        assert all(p.coords == z.coords for p in pts)

    def test_deterministic(self):
        x = RelPoint.of(1, 5)
        a = rel_ball_sample(x, Fraction(1, 8), 6, seed=42)
        b = rel_ball_sample(x, Fraction(1, 8), 6, seed=42)
        assert [p.coords for p in a] == [q.coords for q in b]
        c = rel_ball_sample(x, Fraction(1, 8), 6, seed=43)
        assert [p.coords for p in a] != [q.coords for q in c]

    def test_sphere_sample_hits_radius(self):
        x = RelPoint.of(1, 1, 1)
        r = Fraction(1, 10)
        for y in rel_sphere_sample(x, r, 8, seed=5):
            d = rel_dist(x, y)
            assert d <= r
            assert d > r * Fraction(999, 1000)
