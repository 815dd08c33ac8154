import math
import random
from fractions import Fraction

import mpmath as mp
import pytest

from stabilis.catalog import (
    DomainError,
    algorithm,
    babylonian_sqrt,
    catalog_function,
    high_precision_sin,
    sin_in_precision,
    strassen_input,
)
from stabilis.fpcore import Precision, fl, to_exact
from stabilis.reals import pi_real
from stabilis.relmetric import RelPoint, rel_dist

mp.mp.prec = 700

rng = random.Random(20240817)


def rand_fracs(k, lo=0.1, hi=10.0, signed=False):
    out = []
    for _ in range(k):
        v = Fraction(rng.uniform(lo, hi)).limit_denominator(10**9)
        if signed and rng.random() < 0.5:
            v = -v
        out.append(v)
    return out


class TestNaiveProduct:
    def test_powers_of_two_exact(self):
        alg = algorithm("naive_product", k=3)
        for t in (3, 11, 53):
            out = alg.evaluate([fl(2, t)] * 3, t)[0]
            assert to_exact(out) == 8

    def test_error_within_chain_bound(self):
        k, t = 10, 24
        u = Precision(t).u
        alg = algorithm("naive_product", k=k)
        for _ in range(20):
            xs = rand_fracs(k, signed=True)
            got = alg.evaluate([fl(c, t) for c in xs], t)
            ref = RelPoint(alg.exact_reference(tuple(to_exact(fl(c, t)) for c in xs)))
            d = rel_dist(ref, RelPoint(got))
            assert d <= 2 * (2 * k - 1) * u

    def test_backward_witness_identity(self):
        k, t = 6, 24
        alg = algorithm("naive_product", k=k)
        xs = rand_fracs(k)
        inputs = [fl(c, t) for c in xs]
        out = alg.evaluate(inputs, t)[0]
        rest = Fraction(1)
        for c in xs[1:]:
            rest *= c
        y1 = to_exact(out) / rest
        # the product of (y1, x2..xk) reproduces the computed output exactly
        assert y1 * rest == to_exact(out)


class TestNaiveSum:
    def test_small_integers_exact(self):
        alg = algorithm("naive_sum", k=4)
        out = alg.evaluate([fl(1, 8)] * 4, 8)[0]
        assert to_exact(out) == 4

    def test_cancellation_driven_loss(self):
        # dist blows up like the condition number, not the algorithm
        t = 24
        alg = algorithm("naive_sum", k=2)
        xs = (Fraction(1), Fraction(-1) + Fraction(1, 2**40))
        got = alg.evaluate([fl(c, t) for c in xs], t)
        ref = RelPoint(alg.exact_reference(xs))
        d = rel_dist(ref, RelPoint(got))
        assert d == math.inf or d / Precision(t).u > 2**30


class TestInnerAndNorms:
    def test_inner_product_representable(self):
        alg = algorithm("inner_product", k=3)
        out = alg.evaluate([fl(v, 8) for v in (1, 0, 2, 3, 5, 4)], 8)[0]
        assert to_exact(out) == 11

    def test_norm2_three_four_five(self):
        alg = algorithm("norm2", k=2)
        t = 53
        out = alg.evaluate([fl(3, t), fl(4, t)], t)[0]
        d = rel_dist(RelPoint.of(5), RelPoint.of(out))
        assert d <= 100 * Precision(t).u

    def test_linear_map_rows_match_matmul_entries(self):
        # c_ij as a 1-row linear map over the flattened inputs
        xs = strassen_input(Fraction(1, 3))
        ent = catalog_function("matmul_entry", i=2, j=1)
        got = ent.exact(xs)[0]
        a21, a22, b11, b21 = xs[2], xs[3], xs[4], xs[6]
        assert got == a21 * b11 + a22 * b21

    def test_matmul_is_stacked_inner_products(self):
        t = 53
        xs = rand_fracs(8)
        mm = algorithm("matmul_2x2")
        inner = algorithm("inner_product", k=2)
        fp_in = [fl(c, t) for c in xs]
        got = mm.evaluate(fp_in, t)
        pieces = []
        for i in (0, 1):
            for j in (0, 1):
                args = (fp_in[2 * i], fp_in[2 * i + 1], fp_in[4 + j], fp_in[6 + j])
                pieces.append(inner.evaluate(args, t)[0])
        assert list(got) == pieces


class TestBabylonianSqrt:
    def test_four_is_exact(self):
        for t in (3, 11, 24, 53):
            assert to_exact(babylonian_sqrt(fl(4, t), t)) == 2

    def test_sqrt_two(self):
        t = 53
        r = babylonian_sqrt(fl(2, t), t)
        ref = mp.sqrt(2)
        err = abs(mp.mpf(to_exact(r).numerator) / to_exact(r).denominator - ref) / ref
        assert err <= 50 * 2.0**-53

    def test_zero(self):
        assert babylonian_sqrt(fl(0, 24), 24).is_zero

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            babylonian_sqrt(fl(-1, 24), 24)

    def test_square_near_input_over_binades(self):
        t = 53
        u = Precision(t).u
        for e in range(-30, 31):
            g = Fraction(rng.uniform(1.0, 4.0)).limit_denominator(10**6) * Fraction(2) ** (2 * e)
            gf = fl(g, t)
            r = babylonian_sqrt(gf, t)
            rr = to_exact(r) ** 2
            assert abs(rr - to_exact(gf)) <= 5 * u * to_exact(gf)


class TestStrassen:
    def test_identity_matrices_exact(self):
        alg = algorithm("strassen_2x2")
        for t in (4, 11, 53):
            out = alg.evaluate([fl(v, t) for v in (1, 0, 0, 1, 1, 0, 0, 1)], t)
            assert [to_exact(v) for v in out] == [1, 0, 0, 1]

    def test_algebraic_identity_with_matmul(self):
        st = catalog_function("strassen_g")
        h = catalog_function("strassen_h")
        mm = catalog_function("matmul_2x2")
        for _ in range(10_000):
            xs = tuple(
                Fraction(rng.randint(-999, 999), rng.randint(1, 999)) for _ in range(8)
            )
            assert st.exact(h.exact(xs)) == mm.exact(xs)

    def test_brent_style_absolute_bound(self):
        t = 53
        u = Precision(t).u
        alg = algorithm("strassen_2x2")
        for _ in range(20):
            xs = rand_fracs(8, lo=0.1, hi=2.0, signed=True)
            fp_in = [fl(c, t) for c in xs]
            exact_in = tuple(to_exact(v) for v in fp_in)
            got = alg.evaluate(fp_in, t)
            ref = alg.exact_reference(exact_in)
            amax = max(abs(v) for v in exact_in[:4])
            bmax = max(abs(v) for v in exact_in[4:])
            for gv, rv in zip(got, ref):
                assert abs(to_exact(gv) - rv) <= 100 * amax * bmax * u

    def test_eps_family_relative_blowup(self):
        t = 53
        eps = Fraction(1, 10**8)
        alg = algorithm("strassen_2x2")
        fp_in = [fl(c, t) for c in strassen_input(eps)]
        exact_in = tuple(to_exact(v) for v in fp_in)
        got = RelPoint(alg.evaluate(fp_in, t))
        ref = RelPoint(alg.exact_reference(exact_in))
        lop = rel_dist(ref, got) / Precision(t).u
        assert lop >= 10**6


class TestSine:
    def test_zero(self):
        assert high_precision_sin(Fraction(0)) == 0
        assert sin_in_precision(fl(0, 53), 53).is_zero

    def test_pi_over_six(self):
        x = pi_real() * Fraction(1, 6)
        s = high_precision_sin(x, guard_bits=300)
        iv = s.enclosure(300)
        assert iv.lower() <= Fraction(1, 2) <= iv.upper()

    def test_sin_one_to_sixty_digits(self):
        s = high_precision_sin(Fraction(1), guard_bits=400)
        iv = s.enclosure(400)
        lo = mp.mpf(iv.lower().numerator) / iv.lower().denominator
        hi = mp.mpf(iv.upper().numerator) / iv.upper().denominator
        ref = mp.sin(1)
        assert lo <= ref <= hi
        assert hi - lo < mp.mpf(10) ** -60

    def test_working_precision_matches_library(self):
        t = 53
        for xv in (1.0, 2.5, 7.283185307179586, 1e6 + 0.5):
            xf = fl(Fraction(xv), t)
            got = float(sin_in_precision(xf, t))
            assert got == pytest.approx(math.sin(xv), rel=1e-14, abs=1e-300)

    def test_huge_argument_reduction(self):
        t = 53
        x = fl(pi_real().scalb(40) + 1, t)
        got = to_exact(sin_in_precision(x, t))
        ref = mp.sin(mp.mpf(to_exact(x).numerator) / to_exact(x).denominator)
        assert abs(mp.mpf(got.numerator) / got.denominator - ref) < mp.mpf(2) ** -45


class TestAlgorithmsConvergeToReference:
    def test_high_precision_tracks_exact(self):
        cases = [
            ("naive_product", dict(k=4), rand_fracs(4, signed=True)),
            ("naive_sum", dict(k=4), rand_fracs(4)),
            ("hadamard", dict(k=3), rand_fracs(6, signed=True)),
            ("tensor_product", dict(k=2, l=2), rand_fracs(4)),
            ("inner_product", dict(k=3), rand_fracs(6)),
            ("squared_norm", dict(k=3), rand_fracs(3, signed=True)),
            ("norm2", dict(k=3), rand_fracs(3)),
            ("power", dict(exponent=3), rand_fracs(1)),
            ("scalar_affine", dict(op="mul", alpha=Fraction(3, 7)), rand_fracs(1)),
            ("linear_map", dict(rows=[[1, 2], [3, -4]]), rand_fracs(2)),
        ]
        for aid, kw, xs in cases:
            alg = algorithm(aid, **kw)
            errs = []
            for t in (24, 96, 192):
                fp_in = [fl(c, t) for c in xs]
                got = RelPoint(alg.evaluate(fp_in, t))
                ref = RelPoint(alg.exact_reference(tuple(xs)))
                errs.append(rel_dist(ref, got, bits=max(224, t + 64)))
            assert errs[0] > errs[2], aid
            assert errs[2] < Fraction(1, 2**150), aid
