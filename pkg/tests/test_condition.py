import math
import random
from fractions import Fraction

import pytest

from stabilis.catalog import catalog_function, strassen_input
from stabilis.condition import (
    composition_upper_bound,
    kappa_closed_form,
    kappa_from_jacobian,
    kappa_jacobian,
    kappa_sampled,
    spectral_norm,
    stacking_bounds,
)
from stabilis.relmetric import RelPoint

rng = random.Random(91)


def rand_point(k, lo=0.2, hi=6.0, signed=False):
    vals = []
    for _ in range(k):
        v = Fraction(rng.uniform(lo, hi)).limit_denominator(10**6)
        if signed and rng.random() < 0.5:
            v = -v
        vals.append(v)
    return RelPoint(vals)


def charpoly_sigma_max(rows: list[list[Fraction]]) -> Fraction:
    """Oracle: sqrt of the largest eigenvalue of M^T M via exact
    characteristic polynomial (Faddeev-LeVerrier) and rational bisection."""
    m = len(rows[0])
    # A = M^T M, exact
    A = [[sum(rows[r][i] * rows[r][j] for r in range(len(rows))) for j in range(m)] for i in range(m)]

    def mat_mul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(m)) for j in range(m)] for i in range(m)]

    def trace(X):
        return sum(X[i][i] for i in range(m))

    # Faddeev-LeVerrier: p(x) = x^m + c1 x^(m-1) + ... + cm
    cs = []
    Mk = [[Fraction(0)] * m for _ in range(m)]
    I = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    for k in range(1, m + 1):
        if k == 1:
            Mk = I
        else:
            AM = mat_mul(A, Mk)
            Mk = [[AM[i][j] + (cs[-1] if i == j else 0) for j in range(m)] for i in range(m)]
        AM = mat_mul(A, Mk)
        ck = -trace(AM) / k
        cs.append(ck)

    coeffs = [Fraction(1)] + cs  # monic, highest degree first

    def beyond_all_roots(x: Fraction) -> bool:
        # the charpoly of a symmetric matrix is real-rooted: x exceeds every
        # root iff p and all of its derivatives are positive at x
        cur = coeffs
        while len(cur) > 1:
            acc = Fraction(0)
            for c in cur:
                acc = acc * x + c
            if acc <= 0:
                return False
            n = len(cur) - 1
            cur = [c * (n - i) for i, c in enumerate(cur[:-1])]
        return True

    hi = 1 + max(sum(abs(v) for v in row) for row in A)
    lo = Fraction(0)
    assert beyond_all_roots(hi)
    for _ in range(90):
        mid = (lo + hi) / 2
        if beyond_all_roots(mid):
            hi = mid
        else:
            lo = mid
    from stabilis.catalog import _sqrt_mid

    return _sqrt_mid((lo + hi) / 2)


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 1

    def test_nilpotent(self):
        assert spectral_norm([[0, 2], [0, 0]]) == 2

    def test_zero_matrix(self):
        assert spectral_norm([[0, 0], [0, 0]]) == 0

    def test_against_charpoly_oracle_5x5(self):
        for _ in range(3):
            rows = [[Fraction(rng.uniform(-2, 2)).limit_denominator(997) for _ in range(5)] for _ in range(5)]
            got = spectral_norm(rows)
            ref = charpoly_sigma_max(rows)
            assert abs(got - ref) <= Fraction(1, 10**12) * max(ref, 1)


class TestClosedForms:
    def test_product_sqrt_k(self):
        f = catalog_function("product", k=3)
        r = kappa_closed_form(f, RelPoint.of(1, 2, 3))
        assert abs(r.kappa ** 2 - 3) < Fraction(1, 2**100)

    def test_product_with_zero_coordinate(self):
        f = catalog_function("product", k=3)
        assert kappa_closed_form(f, RelPoint.of(1, 0, 3)).kappa == 0

    def test_sum_at_ones(self):
        f = catalog_function("sum", k=2)
        r = kappa_closed_form(f, RelPoint.of(1, 1))
        assert abs(r.kappa ** 2 - Fraction(1, 2)) < Fraction(1, 2**100)

    def test_sum_singular(self):
        f = catalog_function("sum", k=2)
        r = kappa_closed_form(f, RelPoint.of(1, -1))
        assert r.kappa == math.inf and r.kappa_tilde == math.inf

    def test_sum_permutation_invariant(self):
        f = catalog_function("sum", k=4)
        vals = [Fraction(3), Fraction(-1), Fraction(7), Fraction(2)]
        base = kappa_closed_form(f, RelPoint(vals)).kappa
        perm = vals[::-1]
        assert kappa_closed_form(f, RelPoint(perm)).kappa == base

    def test_sqrt_is_half(self):
        f = catalog_function("sqrt")
        assert kappa_closed_form(f, RelPoint.of(Fraction(7, 3))).kappa == Fraction(1, 2)

    def test_sin_at_half_pi_vanishes(self):
        from stabilis.reals import pi_real

        f = catalog_function("sin")
        r = kappa_closed_form(f, RelPoint.of(pi_real() * Fraction(1, 2)))
        assert abs(r.kappa) < Fraction(1, 10**30)

    def test_univariate_square(self):
        f = catalog_function("power", exponent=2)
        assert kappa_closed_form(f, RelPoint.of(3)).kappa == 2

    def test_identity_map(self):
        f = catalog_function("linear_map", rows=[[1]])
        assert kappa_jacobian(f, RelPoint.of(5)).kappa == 1


class TestJacobianAgreesWithClosedForm:
    FUNCTIONS = [
        ("product", dict(k=4), 4, True),
        ("sum", dict(k=4), 4, True),
        ("hadamard", dict(k=3), 6, True),
        ("tensor_product", dict(k=2, l=3), 5, True),
        ("inner_product", dict(k=3), 6, True),
        ("copy", dict(k=3), 3, True),
        ("squared_norm", dict(k=4), 4, True),
        ("norm2", dict(k=4), 4, False),
        ("power", dict(exponent=3), 1, True),
        ("affine", dict(op="add", alpha=Fraction(5, 3)), 1, True),
        ("matmul_entry", dict(i=2, j=1), 8, True),
    ]

    @pytest.mark.parametrize("fid,kw,dim,signed", FUNCTIONS)
    def test_agreement(self, fid, kw, dim, signed):
        f = catalog_function(fid, **kw)
        for _ in range(10):
            x = rand_point(dim, signed=signed)
            kc = kappa_closed_form(f, x).kappa
            kj = kappa_jacobian(f, x).kappa
            if kc == math.inf:
                continue
            assert abs(kc - kj) <= Fraction(1, 10**12) * max(1, kc), f.id


class TestSampledEstimator:
    def test_product_within_two_percent(self):
        f = catalog_function("product", k=3)
        rep = kappa_sampled(f, RelPoint.of(1, 2, 3), n_dirs=200, seed=11)
        ref = kappa_closed_form(f, RelPoint.of(1, 2, 3)).kappa
        assert abs(rep.kappa - ref) <= Fraction(2, 100) * ref
        assert rep.method == "sampled"

    def test_constant_function_is_zero(self):
        f = catalog_function("affine", op="mul", alpha=0)
        rep = kappa_sampled(f, RelPoint.of(5), seed=3)
        assert rep.kappa == 0

    def test_near_singular_sum_diverges(self):
        f = catalog_function("sum", k=2)
        x = RelPoint.of(1, Fraction(-1) + Fraction(1, 10**9))
        rep = kappa_sampled(f, x, seed=5)
        assert rep.kappa == math.inf or rep.kappa > 10**8

    def test_matches_closed_form_on_catalog(self):
        for fid, kw, dim in [
            ("sum", dict(k=3), 3),
            ("norm2", dict(k=3), 3),
            ("inner_product", dict(k=2), 4),
        ]:
            f = catalog_function(fid, **kw)
            x = rand_point(dim)
            ref = kappa_closed_form(f, x).kappa
            rep = kappa_sampled(f, x, n_dirs=120, seed=7)
            assert abs(rep.kappa - ref) <= Fraction(5, 100) * max(ref, Fraction(1, 100)), fid


class TestBounds:
    def test_composition_bound_trivial(self):
        assert composition_upper_bound(Fraction(1), Fraction(1)) == 1

    def test_composition_bound_inner_product_budget(self):
        # plugging catalog values in gives an upper budget for the composite
        kt_sigma = 1 + Fraction(7071, 10000)
        kt_had = Fraction(3)
        assert composition_upper_bound(kt_sigma, kt_had) == kt_sigma * 3

    def test_composition_bound_dominates_composites(self):
        g = catalog_function("sum", k=2)
        h = catalog_function("hadamard", k=2)
        comp = catalog_function("inner_product", k=2)
        for _ in range(20):
            x = rand_point(4)
            hx = RelPoint(h.exact(x.coords))
            ub = composition_upper_bound(
                kappa_closed_form(g, hx).kappa_tilde, kappa_closed_form(h, x).kappa_tilde
            )
            kt_f = kappa_closed_form(comp, x).kappa_tilde
            assert ub >= kt_f * (1 - Fraction(1, 2**64))

    def test_stacking_examples(self):
        assert stacking_bounds([Fraction(3), Fraction(4)]) == (4, 5)
        lo, hi = stacking_bounds([Fraction(7)])
        assert lo == hi == 7

    def test_stacking_brackets_true_kappa(self):
        f = catalog_function("matmul_2x2")
        entries = [catalog_function("matmul_entry", i=i, j=j) for i in (1, 2) for j in (1, 2)]
        for _ in range(5):
            x = rand_point(8)
            ks = [kappa_closed_form(e, x).kappa for e in entries]
            lo, hi = stacking_bounds(ks)
            kf = kappa_jacobian(f, x).kappa
            slack = Fraction(1, 10**12)
            assert lo <= kf + slack
            assert kf <= hi + slack

    def test_stacking_strassen_eps_budget(self):
        eps = Fraction(1, 1000)
        x = RelPoint(strassen_input(eps))
        entries = [catalog_function("matmul_entry", i=i, j=j) for i in (1, 2) for j in (1, 2)]
        ks = [kappa_closed_form(e, x).kappa for e in entries]
        lo, hi = stacking_bounds(ks)
        kf = kappa_jacobian(catalog_function("matmul_2x2"), x).kappa
        assert lo <= kf <= hi

    def test_infinite_component(self):
        lo, hi = stacking_bounds([Fraction(1), math.inf])
        assert lo == math.inf and hi == math.inf


class TestReportInvariants:
    def test_kappa_tilde_relationship(self):
        f = catalog_function("sum", k=2)
        r = kappa_closed_form(f, RelPoint.of(2, 3))
        assert r.kappa_tilde == 1 + r.kappa
        r2 = kappa_closed_form(f, RelPoint.of(1, -1))
        assert r2.kappa == math.inf and r2.kappa_tilde == math.inf

    def test_dimension_mismatch_rejected(self):
        f = catalog_function("sum", k=3)
        x = RelPoint.of(1, 2, 3)
        fx = RelPoint.of(6)
        with pytest.raises(ValueError):
            kappa_from_jacobian(x, fx, [[1, 1]])
