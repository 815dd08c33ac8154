"""Elementary function catalog and the finite-precision algorithms for it.

Every entry exposes three consistent views that the rest of the package
cross-checks against each other:

* ``exact``     - reference semantics over exact reals (rational maps stay
                  rational; roots and sines become certified enclosures);
* ``jacobian``  - hand-coded derivative matrix (these are polynomial or
                  rational maps, so entries are exact);
* ``kappa_closed`` - the closed-form condition number in the relative
                  metric, where one exists (None falls back to the
                  spectral-norm path).

Alongside, :class:`NumericalAlgorithm` wraps the same functions as
floating-point programs: every arithmetic step is performed in the
soft-float system at the requested precision, constants included.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

from .fpcore import FpError, FpNumber, Precision, fl, fp_add, fp_div, fp_mul, fp_sub, fp_zero, to_exact
from .reals import (
    CertifiedReal,
    ExactReal,
    Interval,
    as_interval,
    cos_iv,
    nth_root_fraction,
    pi_iv,
    real_sign,
    sin_iv,
    sqrt_iv,
    to_real,
)

Coords = tuple[ExactReal, ...]


class DomainError(ValueError):
    """Input outside the function's domain."""


def _frac_only(xs: Coords, what: str) -> tuple[Fraction, ...]:
    if any(not isinstance(v, Fraction) for v in xs):
        raise TypeError(f"{what} requires exact rational coordinates")
    return xs  # type: ignore[return-value]


def _sqrt_mid(q: Fraction, bits: int = 192) -> Fraction:
    """Rational midpoint of a certified sqrt enclosure (exact when possible)."""
    r = nth_root_fraction(q, 2)
    if r is not None:
        return r
    return sqrt_iv(q, bits).midpoint()


def _sum_sq(vals: Sequence[Fraction]) -> Fraction:
    return sum((v * v for v in vals), Fraction(0))


def sqrt_real(x: ExactReal) -> ExactReal:
    """Exact square root when rational, otherwise a certified enclosure."""
    if isinstance(x, Fraction):
        if x < 0:
            raise DomainError("square root of a negative value")
        r = nth_root_fraction(x, 2)
        if r is not None:
            return r
        return CertifiedReal(lambda b: sqrt_iv(x, b))
    return CertifiedReal(lambda b: sqrt_iv(x.enclosure(b + 8), b))


def _pow_real(x: ExactReal, j: int) -> ExactReal:
    return x**j


# ---------------------------------------------------------------------------
# Catalog functions
# ---------------------------------------------------------------------------


class CatalogFunction:
    """A function of the catalog: exact semantics + derivative + condition."""

    id: str
    in_dim: int
    out_dim: int

    def exact(self, xs: Coords) -> Coords:
        raise NotImplementedError

    def jacobian(self, xs: Coords) -> list[list[ExactReal]] | None:
        return None

    def kappa_closed(self, xs: Coords, bits: int = 192):
        """Closed-form condition number, or None if only the spectral path applies."""
        return None

    def in_domain(self, xs: Coords) -> bool:
        return True

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.id} ({self.in_dim}->{self.out_dim})>"


class Product(CatalogFunction):
    def __init__(self, k: int):
        self.id = f"product[{k}]"
        self.in_dim, self.out_dim = k, 1
        self.k = k

    def exact(self, xs):
        out: ExactReal = Fraction(1)
        for v in xs:
            out = out * v
        return (out,)

    def jacobian(self, xs):
        xs = _frac_only(xs, "product jacobian")
        rows = []
        row = []
        for i in range(self.k):
            p = Fraction(1)
            for j, v in enumerate(xs):
                if j != i:
                    p *= v
            row.append(p)
        rows.append(row)
        return rows

    def kappa_closed(self, xs, bits: int = 192):
        signs = [real_sign(v) for v in xs]
        if any(s == 0 for s in signs):
            return Fraction(0)  # locally constant zero
        return _sqrt_mid(Fraction(self.k), bits)


class Summation(CatalogFunction):
    def __init__(self, k: int):
        self.id = f"summation[{k}]"
        self.in_dim, self.out_dim = k, 1
        self.k = k

    def exact(self, xs):
        out: ExactReal = Fraction(0)
        for v in xs:
            out = out + v
        return (out,)

    def jacobian(self, xs):
        return [[Fraction(1)] * self.k]

    def kappa_closed(self, xs, bits: int = 192):
        xs = _frac_only(xs, "summation kappa")
        if all(v == 0 for v in xs):
            return Fraction(0)
        s = sum(xs)
        if s == 0:
            return math.inf
        return _sqrt_mid(_sum_sq(xs), bits) / abs(s)


class Hadamard(CatalogFunction):
    """Entrywise product of two length-k arrays, input flattened to 2k."""

    def __init__(self, k: int):
        self.id = f"hadamard[{k}]"
        self.in_dim, self.out_dim = 2 * k, k
        self.k = k

    def exact(self, xs):
        k = self.k
        return tuple(xs[i] * xs[k + i] for i in range(k))

    def jacobian(self, xs):
        xs = _frac_only(xs, "hadamard jacobian")
        k = self.k
        rows = []
        for i in range(k):
            row = [Fraction(0)] * (2 * k)
            row[i] = xs[k + i]
            row[k + i] = xs[i]
            rows.append(row)
        return rows

    def kappa_closed(self, xs, bits: int = 192):
        k = self.k
        alive = any(real_sign(xs[i]) != 0 and real_sign(xs[k + i]) != 0 for i in range(k))
        if not alive:
            return Fraction(0)
        return _sqrt_mid(Fraction(2), bits)


class TensorProduct(CatalogFunction):
    """Outer product of a length-k and a length-l array."""

    def __init__(self, k: int, l: int):
        self.id = f"tensor_product[{k}x{l}]"
        self.in_dim, self.out_dim = k + l, k * l
        self.k, self.l = k, l

    def exact(self, xs):
        k, l = self.k, self.l
        return tuple(xs[i] * xs[k + j] for i in range(k) for j in range(l))

    def jacobian(self, xs):
        xs = _frac_only(xs, "tensor jacobian")
        k, l = self.k, self.l
        rows = []
        for i in range(k):
            for j in range(l):
                row = [Fraction(0)] * (k + l)
                row[i] = xs[k + j]
                row[k + j] = xs[i]
                rows.append(row)
        return rows

    def kappa_closed(self, xs, bits: int = 192):
        k, l = self.k, self.l
        cx = sum(1 for i in range(k) if real_sign(xs[i]) != 0)
        cy = sum(1 for j in range(l) if real_sign(xs[k + j]) != 0)
        if cx == 0 or cy == 0:
            return Fraction(0)
        return _sqrt_mid(Fraction(cx + cy), bits)


class LinearMap(CatalogFunction):
    """x -> A x for a fixed rational matrix A (rows of coefficients)."""

    def __init__(self, rows: Sequence[Sequence]):
        self.rows = tuple(tuple(Fraction(c) for c in r) for r in rows)
        k = len(self.rows[0])
        if any(len(r) != k for r in self.rows):
            raise ValueError("ragged linear map")
        self.id = f"linear_map[{len(self.rows)}x{k}]"
        self.in_dim, self.out_dim = k, len(self.rows)

    def exact(self, xs):
        out = []
        for r in self.rows:
            acc: ExactReal = Fraction(0)
            for c, v in zip(r, xs):
                if c:
                    acc = acc + c * v
            out.append(acc)
        return tuple(out)

    def jacobian(self, xs):
        return [list(r) for r in self.rows]

    def kappa_closed(self, xs, bits: int = 192):
        if self.out_dim != 1:
            return None  # stacked rows go through the spectral path
        xs = _frac_only(xs, "linear map kappa")
        r = self.rows[0]
        prods = [c * v for c, v in zip(r, xs)]
        if all(p == 0 for p in prods):
            return Fraction(0)
        s = sum(prods)
        if s == 0:
            return math.inf
        return _sqrt_mid(_sum_sq(prods), bits) / abs(s)


class InnerProduct(CatalogFunction):
    """<x, y> with the two length-k arrays flattened to 2k inputs."""

    def __init__(self, k: int):
        self.id = f"inner_product[{k}]"
        self.in_dim, self.out_dim = 2 * k, 1
        self.k = k

    def exact(self, xs):
        k = self.k
        acc: ExactReal = Fraction(0)
        for i in range(k):
            acc = acc + xs[i] * xs[k + i]
        return (acc,)

    def jacobian(self, xs):
        xs = _frac_only(xs, "inner product jacobian")
        k = self.k
        return [list(xs[k:]) + list(xs[:k])]

    def kappa_closed(self, xs, bits: int = 192):
        # a relative perturbation reaches each product through both factors,
        # hence the sqrt(2) on top of the summation-stage condition number
        xs = _frac_only(xs, "inner product kappa")
        k = self.k
        prods = [xs[i] * xs[k + i] for i in range(k)]
        if all(p == 0 for p in prods):
            return Fraction(0)
        s = sum(prods)
        if s == 0:
            return math.inf
        return _sqrt_mid(2 * _sum_sq(prods), bits) / abs(s)


class Copy(CatalogFunction):
    def __init__(self, k: int):
        self.id = f"copy[{k}]"
        self.in_dim, self.out_dim = k, 2 * k
        self.k = k

    def exact(self, xs):
        return tuple(xs) + tuple(xs)

    def jacobian(self, xs):
        k = self.k
        eye = [[Fraction(1) if i == j else Fraction(0) for j in range(k)] for i in range(k)]
        return eye + eye

    def kappa_closed(self, xs, bits: int = 192):
        if all(real_sign(v) == 0 for v in xs):
            return Fraction(0)
        return _sqrt_mid(Fraction(2), bits)


class SquaredNorm(CatalogFunction):
    def __init__(self, k: int):
        self.id = f"squared_norm[{k}]"
        self.in_dim, self.out_dim = k, 1
        self.k = k

    def exact(self, xs):
        acc: ExactReal = Fraction(0)
        for v in xs:
            acc = acc + v * v
        return (acc,)

    def jacobian(self, xs):
        xs = _frac_only(xs, "squared norm jacobian")
        return [[2 * v for v in xs]]

    def kappa_closed(self, xs, bits: int = 192):
        xs = _frac_only(xs, "squared norm kappa")
        q = _sum_sq(xs)
        if q == 0:
            return Fraction(0)
        q4 = sum((v**4 for v in xs), Fraction(0))
        return 2 * _sqrt_mid(q4, bits) / q


class Sqrt(CatalogFunction):
    def __init__(self):
        self.id = "sqrt"
        self.in_dim = self.out_dim = 1

    def in_domain(self, xs):
        return real_sign(xs[0]) >= 0

    def exact(self, xs):
        return (sqrt_real(xs[0]),)

    def jacobian(self, xs):
        x = xs[0]
        if real_sign(x) <= 0:
            return None
        root = sqrt_real(x)
        if isinstance(root, Fraction):
            return [[1 / (2 * root)]]
        return [[CertifiedReal(lambda b: Interval.from_fraction(Fraction(1, 2), b).divide(root.enclosure(b + 8), b))]]

    def kappa_closed(self, xs, bits: int = 192):
        if real_sign(xs[0]) == 0:
            return Fraction(0)  # isolated point of the domain
        return Fraction(1, 2)


class Norm2(CatalogFunction):
    def __init__(self, k: int):
        self.id = f"norm2[{k}]"
        self.in_dim, self.out_dim = k, 1
        self.k = k

    def exact(self, xs):
        acc: ExactReal = Fraction(0)
        for v in xs:
            acc = acc + v * v
        return (sqrt_real(acc),)

    def jacobian(self, xs):
        xs = _frac_only(xs, "norm jacobian")
        q = _sum_sq(xs)
        if q == 0:
            return None
        nrm = sqrt_real(q)
        out = []
        for v in xs:
            if isinstance(nrm, Fraction):
                out.append(v / nrm)
            else:
                out.append(v * CertifiedReal(lambda b, n=nrm: Interval.from_fraction(Fraction(1), b).divide(n.enclosure(b + 8), b)))
        return [out]

    def kappa_closed(self, xs, bits: int = 192):
        xs = _frac_only(xs, "norm kappa")
        q = _sum_sq(xs)
        if q == 0:
            return Fraction(0)
        q4 = sum((v**4 for v in xs), Fraction(0))
        return _sqrt_mid(q4, bits) / q


class Power(CatalogFunction):
    def __init__(self, j: int):
        self.id = f"power[{j}]"
        self.in_dim = self.out_dim = 1
        self.j = j

    def in_domain(self, xs):
        return self.j >= 0 or real_sign(xs[0]) != 0

    def exact(self, xs):
        return (_pow_real(xs[0], self.j),)

    def jacobian(self, xs):
        x = xs[0]
        if self.j == 0:
            return [[Fraction(0)]]
        return [[self.j * _pow_real(x, self.j - 1)]]

    def kappa_closed(self, xs, bits: int = 192):
        if real_sign(xs[0]) == 0:
            return Fraction(0)
        return Fraction(abs(self.j)) if self.j != 0 else Fraction(0)


class Affine(CatalogFunction):
    """x -> x op alpha for op in {add, sub, mul, div} and a rational alpha."""

    def __init__(self, op: str, alpha):
        if op not in ("add", "sub", "mul", "div"):
            raise ValueError(f"unknown scalar op {op!r}")
        self.alpha = Fraction(to_real(alpha)) if not isinstance(alpha, Fraction) else alpha
        if op == "div" and self.alpha == 0:
            raise ValueError("division by a zero constant")
        self.op = op
        self.id = f"affine[{op},{self.alpha}]"
        self.in_dim = self.out_dim = 1

    def exact(self, xs):
        x = xs[0]
        a = self.alpha
        if self.op == "add":
            return (x + a,)
        if self.op == "sub":
            return (x - a,)
        if self.op == "mul":
            return (x * a,)
        return (x / a if isinstance(x, Fraction) else x * (1 / a),)

    def jacobian(self, xs):
        if self.op in ("add", "sub"):
            return [[Fraction(1)]]
        if self.op == "mul":
            return [[self.alpha]]
        return [[1 / self.alpha]]

    def kappa_closed(self, xs, bits: int = 192):
        x = xs[0]
        if real_sign(x) == 0:
            return Fraction(0)
        if self.op in ("mul", "div"):
            return Fraction(0) if self.alpha == 0 else Fraction(1)
        x = _frac_only(xs, "affine kappa")[0]
        fx = x + self.alpha if self.op == "add" else x - self.alpha
        if fx == 0:
            return math.inf
        return abs(x / fx)


class Sin(CatalogFunction):
    def __init__(self):
        self.id = "sin"
        self.in_dim = self.out_dim = 1

    def exact(self, xs):
        return (high_precision_sin(xs[0]),)

    def jacobian(self, xs):
        x = xs[0]

        def fn(bits: int) -> Interval:
            xi = as_interval(x, bits + 16)
            xi = as_interval(x, bits + max(xi.mag_bits(), 1) + 16)
            return cos_iv(xi, bits)

        return [[CertifiedReal(fn)]]

    def kappa_closed(self, xs, bits: int = 192):
        x = xs[0]
        if real_sign(x) == 0:
            return Fraction(0)
        for b in (bits, 2 * bits, 4 * bits):
            xi = as_interval(x, b + 16)
            xi = as_interval(x, b + max(xi.mag_bits(), 1) + 16)
            s = sin_iv(xi, b)
            if s.sign() in (-1, 1):
                c = cos_iv(xi, b)
                val = (xi * c).divide(s, b)
                m = val.midpoint()
                return abs(m)
        return math.inf  # within rounding distance of a sine zero


# -- Strassen / matmul -------------------------------------------------------


def _lin(xs, terms):
    acc: ExactReal = Fraction(0)
    for c, i in terms:
        acc = acc + c * xs[i]
    return acc


_H_TERMS = [
    # (a-side terms, b-side terms); h_i = (sum a) * (sum b)
    ([(1, 0), (1, 3)], [(1, 4), (1, 7)]),
    ([(1, 2), (1, 3)], [(1, 4)]),
    ([(1, 0)], [(1, 5), (-1, 7)]),
    ([(1, 3)], [(1, 6), (-1, 4)]),
    ([(1, 0), (1, 1)], [(1, 7)]),
    ([(1, 2), (-1, 0)], [(1, 4), (1, 5)]),
    ([(1, 1), (-1, 3)], [(1, 6), (1, 7)]),
]

_G_TERMS = [
    [(1, 0), (1, 3), (-1, 4), (1, 6)],
    [(1, 2), (1, 4)],
    [(1, 1), (1, 3)],
    [(1, 0), (-1, 1), (1, 2), (1, 5)],
]


class StrassenH(CatalogFunction):
    """The seven bilinear forms of Strassen's 2x2 scheme (inputs: A then B, row-major)."""

    def __init__(self):
        self.id = "strassen_h"
        self.in_dim, self.out_dim = 8, 7

    def exact(self, xs):
        return tuple(_lin(xs, at) * _lin(xs, bt) for at, bt in _H_TERMS)

    def jacobian(self, xs):
        xs = _frac_only(xs, "strassen_h jacobian")
        rows = []
        for at, bt in _H_TERMS:
            u = _lin(xs, at)
            v = _lin(xs, bt)
            row = [Fraction(0)] * 8
            for c, i in at:
                row[i] += c * v
            for c, i in bt:
                row[i] += c * u
            rows.append(row)
        return rows


class StrassenG(CatalogFunction):
    """The four +-1 recombinations of Strassen's scheme (output row-major C)."""

    def __init__(self):
        self.id = "strassen_g"
        self.in_dim, self.out_dim = 7, 4

    def exact(self, xs):
        return tuple(_lin(xs, t) for t in _G_TERMS)

    def jacobian(self, xs):
        rows = []
        for t in _G_TERMS:
            row = [Fraction(0)] * 7
            for c, i in t:
                row[i] += Fraction(c)
            rows.append(row)
        return rows


class MatmulEntry(CatalogFunction):
    """One entry c_ij of the 2x2 matrix product (i, j are 1-based)."""

    def __init__(self, i: int, j: int):
        if i not in (1, 2) or j not in (1, 2):
            raise ValueError("matmul entry indices must be 1 or 2")
        self.i, self.j = i, j
        self.id = f"matmul_entry[{i}{j}]"
        self.in_dim, self.out_dim = 8, 1

    def _pairs(self):
        i, j = self.i - 1, self.j - 1
        return ((2 * i, 4 + j), (2 * i + 1, 4 + 2 + j))

    def exact(self, xs):
        (p, q), (r, s) = self._pairs()
        return (xs[p] * xs[q] + xs[r] * xs[s],)

    def jacobian(self, xs):
        xs = _frac_only(xs, "matmul entry jacobian")
        row = [Fraction(0)] * 8
        (p, q), (r, s) = self._pairs()
        row[p] += xs[q]
        row[q] += xs[p]
        row[r] += xs[s]
        row[s] += xs[r]
        return [row]

    def kappa_closed(self, xs, bits: int = 192):
        # inner-product special case: both factors of each product perturb
        xs = _frac_only(xs, "matmul entry kappa")
        (p, q), (r, s) = self._pairs()
        prods = [xs[p] * xs[q], xs[r] * xs[s]]
        if all(v == 0 for v in prods):
            return Fraction(0)
        tot = prods[0] + prods[1]
        if tot == 0:
            return math.inf
        return _sqrt_mid(2 * _sum_sq(prods), bits) / abs(tot)


class Matmul2x2(CatalogFunction):
    """The full 2x2 matrix product (A, B) -> AB, row-major in and out."""

    def __init__(self):
        self.id = "matmul_2x2"
        self.in_dim, self.out_dim = 8, 4
        self._entries = [MatmulEntry(i, j) for i in (1, 2) for j in (1, 2)]

    def exact(self, xs):
        return tuple(e.exact(xs)[0] for e in self._entries)

    def jacobian(self, xs):
        return [e.jacobian(xs)[0] for e in self._entries]


# ---------------------------------------------------------------------------
# Floating-point algorithms
# ---------------------------------------------------------------------------


class NumericalAlgorithm:
    """A floating-point program implementing a catalog function.

    ``evaluate`` carries out every arithmetic operation in the soft-float
    system at the requested precision (constants are rounded on entry),
    mirroring how a strong finite-precision computation replaces the exact
    one.  ``exact_reference`` is the implemented function's exact value.
    """

    def __init__(self, aid: str, function: CatalogFunction, run: Callable):
        self.id = aid
        self.function = function
        self._run = run

    @property
    def in_dim(self) -> int:
        return self.function.in_dim

    @property
    def out_dim(self) -> int:
        return self.function.out_dim

    def evaluate(self, xs: Sequence[FpNumber], p: Precision | int) -> tuple[FpNumber, ...]:
        p = Precision.of(p)
        if len(xs) != self.in_dim:
            raise ValueError(f"{self.id} expects {self.in_dim} inputs, got {len(xs)}")
        out = self._run(tuple(xs), p)
        return out if isinstance(out, tuple) else (out,)

    def exact_reference(self, xs: Coords) -> Coords:
        return self.function.exact(xs)

    def __repr__(self) -> str:
        return f"<NumericalAlgorithm {self.id}>"


def _run_naive_product(xs, p):
    acc = xs[0]
    for v in xs[1:]:
        acc = fp_mul(acc, v, p)
    return (acc,)


def _run_naive_sum(xs, p):
    acc = xs[0]
    for v in xs[1:]:
        acc = fp_add(acc, v, p)
    return (acc,)


def _run_hadamard(k):
    def run(xs, p):
        return tuple(fp_mul(xs[i], xs[k + i], p) for i in range(k))

    return run


def _run_tensor(k, l):
    def run(xs, p):
        return tuple(fp_mul(xs[i], xs[k + j], p) for i in range(k) for j in range(l))

    return run


def _run_linear_map(rows):
    def run(xs, p):
        out = []
        for r in rows:
            terms = [fp_mul(fl(c, p), x, p) for c, x in zip(r, xs)]
            acc = terms[0]
            for tmv in terms[1:]:
                acc = fp_add(acc, tmv, p)
            out.append(acc)
        return tuple(out)

    return run


def _run_inner(k):
    def run(xs, p):
        acc = fp_mul(xs[0], xs[k], p)
        for i in range(1, k):
            acc = fp_add(acc, fp_mul(xs[i], xs[k + i], p), p)
        return (acc,)

    return run


def _run_copy(xs, p):
    return tuple(xs) + tuple(xs)


def _run_squared_norm(k):
    inner = _run_inner(k)

    def run(xs, p):
        return inner(tuple(xs) + tuple(xs), p)

    return run


def babylonian_sqrt(g: FpNumber, p: Precision | int) -> FpNumber:
    """Square root by scaling into [1/4, 1] and Newton iteration from 1/2.

    Termination: relative step below 4u, capped at 2t iterations.
    """
    p = Precision.of(p)
    t = p.t
    if g.is_zero:
        return fp_zero()
    if g.sign < 0:
        raise DomainError("square root of a negative value")
    E = g.exponent
    k = (E + 1) // 2 if E >= 0 else -((-E) // 2)
    # m = g * 4**-k lands in [1/4, 1)
    m = FpNumber(1, g.mantissa, E - 2 * k)
    x = fl(Fraction(1, 2), p)
    two = fl(2, p)
    for _ in range(2 * t):
        q = fp_div(m, x, p)
        nx = fp_div(fp_add(x, q, p), two, p)
        step = fp_sub(nx, x, p)
        # |step| <= 4u*x, compared exactly via an exponent shift
        thresh = FpNumber(1, x.mantissa, x.exponent + 2 - t)
        x = nx
        if abs(step) <= thresh:
            break
    else:
        raise FpError("square-root iteration failed to settle")
    return FpNumber(x.sign, x.mantissa, x.exponent + k)


def _run_babylonian(xs, p):
    return (babylonian_sqrt(xs[0], p),)


def _run_norm2(k):
    sq = _run_squared_norm(k)

    def run(xs, p):
        return (babylonian_sqrt(sq(xs, p)[0], p),)

    return run


def _run_power(j):
    def run(xs, p):
        x = xs[0]
        if j == 0:
            return (fl(1, p),)
        n = abs(j)
        acc = x
        for _ in range(n - 1):
            acc = fp_mul(acc, x, p)
        if j < 0:
            acc = fp_div(fl(1, p), acc, p)
        return (acc,)

    return run


def _run_affine(op, alpha):
    def run(xs, p):
        a = fl(alpha, p)
        x = xs[0]
        if op == "add":
            return (fp_add(x, a, p),)
        if op == "sub":
            return (fp_sub(x, a, p),)
        if op == "mul":
            return (fp_mul(x, a, p),)
        return (fp_div(x, a, p),)

    return run


def _fp_lin(xs, terms, p):
    acc = None
    for c, i in terms:
        v = xs[i] if c > 0 else -xs[i]
        acc = v if acc is None else fp_add(acc, v, p)
    return acc


def _run_strassen_h(xs, p):
    return tuple(fp_mul(_fp_lin(xs, at, p), _fp_lin(xs, bt, p), p) for at, bt in _H_TERMS)


def _run_strassen_g(xs, p):
    return tuple(_fp_lin(xs, t, p) for t in _G_TERMS)


def _run_strassen_2x2(xs, p):
    return _run_strassen_g(_run_strassen_h(xs, p), p)


def _run_matmul_2x2(xs, p):
    inner = _run_inner(2)
    out = []
    for i in (0, 1):
        for j in (0, 1):
            args = (xs[2 * i], xs[2 * i + 1], xs[4 + j], xs[4 + 2 + j])
            out.append(inner(args, p)[0])
    return tuple(out)


def _run_matmul_entry(i, j):
    inner = _run_inner(2)

    def run(xs, p):
        ii, jj = i - 1, j - 1
        args = (xs[2 * ii], xs[2 * ii + 1], xs[4 + jj], xs[4 + 2 + jj])
        return inner(args, p)

    return run


# -- sine ---------------------------------------------------------------


def high_precision_sin(x: ExactReal, guard_bits: int = 0) -> ExactReal:
    """Certified sine: argument reduction modulo pi, then a Taylor series.

    The returned enclosure is evaluated with at least ``guard_bits`` of
    resolution; refinement on demand covers the rest.  An exactly-zero
    input returns the exact zero (no enclosure can certify one).
    """
    x = to_real(x)
    if isinstance(x, Fraction) and x == 0:
        return Fraction(0)

    def fn(bits: int) -> Interval:
        b = max(bits, guard_bits)
        xi = as_interval(x, b + 16)
        xi = as_interval(x, b + max(xi.mag_bits(), 1) + 16)
        return sin_iv(xi, b)

    return CertifiedReal(fn)


def sin_in_precision(x: FpNumber, p: Precision | int) -> FpNumber:
    """Sine of a floating-point input, the way a faithful library computes it.

    The argument is reduced modulo pi with guard-precision knowledge of pi
    (the reduced argument is then correctly rounded into the working
    precision); the Taylor loop runs entirely in the working precision.
    """
    p = Precision.of(p)
    if x.is_zero:
        return fp_zero()
    X = to_exact(x)
    mag = max(x.exponent, 1)

    piq = Interval.from_fraction(X, mag + 80).divide(pi_iv(mag + 80), 64)
    n = (piq.lo + piq.hi + (1 << 64)) >> 65

    if n == 0:
        rhat = x
    else:
        def red(bits: int) -> Interval:
            w = bits + mag + max(1, abs(n).bit_length()) + 16
            return (Interval.from_fraction(X, w) - pi_iv(w).mul_int(n)).rescale(bits + 16)

        rhat = fl(CertifiedReal(red), p)
    # Taylor loop in the working precision
    total = rhat
    term = rhat
    rsq = fp_mul(rhat, rhat, p)
    j = 1
    while True:
        den = fl((2 * j) * (2 * j + 1), p)
        term = -fp_div(fp_mul(term, rsq, p), den, p)
        new_total = fp_add(total, term, p)
        if new_total == total or j > p.t:
            break
        total = new_total
        j += 1
    if n % 2:
        total = -total
    return total


class _SinAlgorithm(NumericalAlgorithm):
    def __init__(self):
        super().__init__("sin_working", Sin(), lambda xs, p: (sin_in_precision(xs[0], p),))


# ---------------------------------------------------------------------------
# Registries
# ---------------------------------------------------------------------------


def catalog_function(fid: str, **kw) -> CatalogFunction:
    """Build a catalog function by name; dims and constants via keywords."""
    k = kw.get("k", 2)
    if fid == "product":
        return Product(k)
    if fid in ("sum", "summation"):
        return Summation(k)
    if fid == "hadamard":
        return Hadamard(k)
    if fid == "tensor_product":
        return TensorProduct(k, kw.get("l", k))
    if fid == "linear_map":
        return LinearMap(kw["rows"])
    if fid in ("inner", "inner_product"):
        return InnerProduct(k)
    if fid == "copy":
        return Copy(k)
    if fid == "squared_norm":
        return SquaredNorm(k)
    if fid == "sqrt":
        return Sqrt()
    if fid == "norm2":
        return Norm2(k)
    if fid == "power":
        return Power(kw["exponent"])
    if fid == "affine":
        return Affine(kw["op"], kw["alpha"])
    if fid == "sin":
        return Sin()
    if fid == "strassen_h":
        return StrassenH()
    if fid == "strassen_g":
        return StrassenG()
    if fid == "matmul_entry":
        return MatmulEntry(kw.get("i", 1), kw.get("j", 2))
    if fid == "matmul_2x2":
        return Matmul2x2()
    raise ValueError(f"unknown catalog function {fid!r}")


def algorithm(aid: str, **kw) -> NumericalAlgorithm:
    """Build a floating-point algorithm by name."""
    k = kw.get("k", 2)
    if aid == "naive_product":
        return NumericalAlgorithm(aid, Product(k), _run_naive_product)
    if aid == "naive_sum":
        return NumericalAlgorithm(aid, Summation(k), _run_naive_sum)
    if aid == "hadamard":
        return NumericalAlgorithm(aid, Hadamard(k), _run_hadamard(k))
    if aid == "tensor_product":
        l = kw.get("l", k)
        return NumericalAlgorithm(aid, TensorProduct(k, l), _run_tensor(k, l))
    if aid == "linear_map":
        f = LinearMap(kw["rows"])
        return NumericalAlgorithm(aid, f, _run_linear_map(f.rows))
    if aid == "inner_product":
        return NumericalAlgorithm(aid, InnerProduct(k), _run_inner(k))
    if aid == "copy":
        return NumericalAlgorithm(aid, Copy(k), _run_copy)
    if aid == "squared_norm":
        return NumericalAlgorithm(aid, SquaredNorm(k), _run_squared_norm(k))
    if aid == "norm2":
        return NumericalAlgorithm(aid, Norm2(k), _run_norm2(k))
    if aid == "babylonian_sqrt":
        return NumericalAlgorithm(aid, Sqrt(), _run_babylonian)
    if aid == "power":
        j = kw["exponent"]
        return NumericalAlgorithm(aid, Power(j), _run_power(j))
    if aid == "scalar_affine":
        return NumericalAlgorithm(aid, Affine(kw["op"], kw["alpha"]), _run_affine(kw["op"], Fraction(kw["alpha"])))
    if aid == "strassen_h":
        return NumericalAlgorithm(aid, StrassenH(), _run_strassen_h)
    if aid == "strassen_g":
        return NumericalAlgorithm(aid, StrassenG(), _run_strassen_g)
    if aid == "strassen_2x2":
        return NumericalAlgorithm(aid, Matmul2x2(), _run_strassen_2x2)
    if aid == "matmul_2x2":
        return NumericalAlgorithm(aid, Matmul2x2(), _run_matmul_2x2)
    if aid == "matmul_entry":
        i, j = kw.get("i", 1), kw.get("j", 2)
        return NumericalAlgorithm(aid, MatmulEntry(i, j), _run_matmul_entry(i, j))
    if aid == "sin_working":
        return _SinAlgorithm()
    raise ValueError(f"unknown algorithm {aid!r}")


def strassen_input(eps: Fraction) -> tuple[Fraction, ...]:
    """The ill-conditioned pair A = B = [[1, eps], [eps, 1]], flattened."""
    eps = Fraction(eps)
    a = (Fraction(1), eps, eps, Fraction(1))
    return a + a
