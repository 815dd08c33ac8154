"""Exact rationals and certified dyadic enclosures for irrational reals.

Two kinds of "exact real" circulate in this package:

* ``fractions.Fraction`` for values that are exactly rational, and
* :class:`CertifiedReal` for computable irrationals (pi, logs, square
  roots, sines, ...), represented by a generator that produces a dyadic
  interval guaranteed to contain the value at any requested resolution.

All interval arithmetic rounds outward, so enclosures are always valid;
callers that need more resolution simply re-evaluate with more bits.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Union


class PrecisionError(ArithmeticError):
    """An enclosure could not be refined enough to decide a predicate."""


# ---------------------------------------------------------------------------
# Dyadic intervals
# ---------------------------------------------------------------------------


def _shr_floor(a: int, k: int) -> int:
    return a >> k if k >= 0 else a << -k


def _shr_ceil(a: int, k: int) -> int:
    return -((-a) >> k) if k >= 0 else a << -k


class Interval:
    """Closed interval [lo, hi] * 2**-scale with integer endpoints."""

    __slots__ = ("lo", "hi", "scale")

    def __init__(self, lo: int, hi: int, scale: int):
        if lo > hi:
            raise ValueError("interval endpoints out of order")
        self.lo = lo
        self.hi = hi
        self.scale = scale

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_fraction(x: Fraction | int, scale: int) -> "Interval":
        if isinstance(x, int):
            x = Fraction(x)
        n, d = x.numerator, x.denominator
        if scale >= 0:
            n <<= scale
        else:
            d <<= -scale
        lo = n // d
        hi = lo if n % d == 0 else lo + 1
        return Interval(lo, hi, scale)

    @staticmethod
    def point(m: int, scale: int) -> "Interval":
        return Interval(m, m, scale)

    # -- queries ------------------------------------------------------

    def midpoint(self) -> Fraction:
        return Fraction(self.lo + self.hi, 2 ** (self.scale + 1))

    def lower(self) -> Fraction:
        return Fraction(self.lo, 2**self.scale) if self.scale >= 0 else Fraction(self.lo << -self.scale)

    def upper(self) -> Fraction:
        return Fraction(self.hi, 2**self.scale) if self.scale >= 0 else Fraction(self.hi << -self.scale)

    def sign(self) -> int | None:
        """Certain sign of every point in the interval, or None if mixed."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def mag_bits(self) -> int:
        """Upper bound on log2 of the magnitude (0 for the zero interval)."""
        m = max(abs(self.lo), abs(self.hi))
        return m.bit_length() - self.scale

    def width_ulps(self) -> int:
        return self.hi - self.lo

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Interval({self.lo}, {self.hi}, 2^-{self.scale})"

    # -- arithmetic (outward) ------------------------------------------

    def rescale(self, scale: int) -> "Interval":
        if scale == self.scale:
            return self
        k = self.scale - scale
        return Interval(_shr_floor(self.lo, k), _shr_ceil(self.hi, k), scale)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.scale)

    def __add__(self, other: "Interval") -> "Interval":
        s = max(self.scale, other.scale)
        a, b = self.rescale(s), other.rescale(s)
        return Interval(a.lo + b.lo, a.hi + b.hi, s)

    def __sub__(self, other: "Interval") -> "Interval":
        return self + (-other)

    def __mul__(self, other: "Interval") -> "Interval":
        cands = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(cands), max(cands), self.scale + other.scale)

    def mul_int(self, k: int) -> "Interval":
        if k >= 0:
            return Interval(self.lo * k, self.hi * k, self.scale)
        return Interval(self.hi * k, self.lo * k, self.scale)

    def div_int(self, k: int) -> "Interval":
        """Divide by a nonzero integer, rounding outward."""
        if k < 0:
            return (-self).div_int(-k)
        return Interval(self.lo // k, -((-self.hi) // k), self.scale)

    def divide(self, other: "Interval", scale: int) -> "Interval":
        """self / other at the given result scale; other must exclude zero."""
        if other.sign() not in (-1, 1):
            raise ZeroDivisionError("interval divisor straddles zero")
        sh = scale + other.scale - self.scale
        lo = hi = None
        for n in (self.lo, self.hi):
            num = n << sh if sh >= 0 else n
            for d in (other.lo, other.hi):
                den = d if sh >= 0 else d << -sh
                q_lo = num // den
                q_hi = -((-num) // den)
                lo = q_lo if lo is None else min(lo, q_lo)
                hi = q_hi if hi is None else max(hi, q_hi)
        return Interval(lo, hi, scale)

    def scalb(self, k: int) -> "Interval":
        """Multiply by 2**k exactly."""
        return Interval(self.lo, self.hi, self.scale - k)

    def widen_ulps(self, n: int) -> "Interval":
        return Interval(self.lo - n, self.hi + n, self.scale)

    def intersect(self, other: "Interval") -> "Interval":
        s = max(self.scale, other.scale)
        a, b = self.rescale(s), other.rescale(s)
        return Interval(max(a.lo, b.lo), min(a.hi, b.hi), s)


# ---------------------------------------------------------------------------
# Integer series cores
# ---------------------------------------------------------------------------
# Each core returns (S, E, scale) with |value * 2**scale - S| <= E.  They
# work on a dyadic midpoint plus an explicit half-width margin so interval
# inputs are handled by a single evaluation path.


def _pi_core(scale: int) -> tuple[int, int]:
    """Machin's formula: pi = 16 atan(1/5) - 4 atan(1/239)."""

    def atan_inv(k: int) -> tuple[int, int]:
        k2 = k * k
        num = (1 << scale) // k
        total = num
        err = 2
        j = 1
        sign = -1
        while num:
            num //= k2
            total += sign * (num // (2 * j + 1))
            err += 4
            sign = -sign
            j += 1
        return total, err + 2

    s5, e5 = atan_inv(5)
    s239, e239 = atan_inv(239)
    return 16 * s5 - 4 * s239, 16 * e5 + 4 * e239


_PI_CACHE: dict[int, tuple[int, int]] = {}


def pi_iv(bits: int) -> Interval:
    """Enclosure of pi with width below 2**-bits."""
    scale = ((bits + 63) // 64 + 1) * 64
    cached = _PI_CACHE.get(scale)
    if cached is None:
        cached = _pi_core(scale)
        if len(_PI_CACHE) > 64:
            _PI_CACHE.clear()
        _PI_CACHE[scale] = cached
    s, e = cached
    return Interval(s - e, s + e, scale)


def _ln2_core(scale: int) -> tuple[int, int]:
    """ln 2 = 2 atanh(1/3) = 2 * sum 1/(3**(2j+1) (2j+1))."""
    num = (1 << scale) // 3
    total = num
    err = 2
    j = 1
    while num:
        num //= 9
        total += num // (2 * j + 1)
        err += 4
        j += 1
    # tail bounded by the first omitted term, itself below 1 ulp here
    return 2 * total, 2 * (err + 2)


_LN2_CACHE: dict[int, tuple[int, int]] = {}


def ln2_iv(bits: int) -> Interval:
    scale = ((bits + 63) // 64 + 1) * 64
    cached = _LN2_CACHE.get(scale)
    if cached is None:
        cached = _ln2_core(scale)
        if len(_LN2_CACHE) > 64:
            _LN2_CACHE.clear()
        _LN2_CACHE[scale] = cached
    s, e = cached
    return Interval(s - e, s + e, scale)


def _atanh_core(Z: int, W: int, hw: int) -> tuple[int, int]:
    """Enclosure of atanh(z) for z in [Z-hw, Z+hw] * 2**-W, |z| <= 0.4.

    Returns (S, E) at scale W.  The derivative of atanh on that range is
    below 1.2, so input uncertainty enters with a factor-2 margin.
    """
    absZ = abs(Z)
    if 5 * (absZ + hw) >= (1 << (W + 1)):
        raise ValueError("atanh argument out of range")
    Z2 = (absZ * absZ) >> W  # z^2 with <= 1 ulp slack, covered by err
    term = absZ
    total = absZ
    err = 1
    j = 1
    while term:
        term = (term * Z2) >> W
        total += term // (2 * j + 1)
        err += 6
        j += 1
    err += 4          # tail: ratio z^2 <= 0.16, so tail < remaining term
    err += 2 * hw + 2  # input half-width through the derivative bound
    return (total if Z >= 0 else -total), err


def log_iv(x: Union[Fraction, int, Interval], bits: int) -> Interval:
    """Enclosure of the natural logarithm of a positive value."""
    W = bits + 32
    if isinstance(x, Interval):
        if x.sign() != 1:
            raise ValueError("log of a non-positive enclosure")
        lo = log_iv(x.lower(), bits)
        hi = log_iv(x.upper(), bits)
        s = max(lo.scale, hi.scale)
        lo, hi = lo.rescale(s), hi.rescale(s)
        return Interval(lo.lo, hi.hi, s)
    if isinstance(x, int):
        x = Fraction(x)
    if x <= 0:
        raise ValueError("log of a non-positive value")
    num, den = x.numerator, x.denominator
    e = num.bit_length() - den.bit_length()
    # choose e with m = x / 2**e in [2/3, 4/3)
    if e >= 0:
        if 3 * num > 4 * (den << e):
            e += 1
    else:
        if 3 * (num << -e) > 4 * den:
            e += 1
    if e >= 0:
        mn, md = num, den << e
    else:
        mn, md = num << -e, den
    zn, zd = mn - md, mn + md
    Z = (zn << W) // zd
    s, err = _atanh_core(Z, W, 1)
    at = Interval(2 * (s - err), 2 * (s + err), W)
    if e == 0:
        return at
    return at + ln2_iv(W + e.bit_length() + 4).mul_int(e)


def exp_iv(x: Union[Fraction, int, Interval], bits: int) -> Interval:
    """Enclosure of exp(x)."""
    if not isinstance(x, Interval):
        x = Interval.from_fraction(x, bits + 32)
    W = bits + 32
    # range-reduce by multiples of ln 2
    mid = x.midpoint()
    n = int(math.floor(float(mid) / math.log(2) + 0.5)) if mid != 0 else 0
    if n != 0:
        l2 = ln2_iv(W + n.bit_length() + 8)
        y = x - l2.mul_int(n)
    else:
        y = x
    y = y.rescale(W)
    if y.lo < -(3 << (W - 2)) or y.hi > (3 << (W - 2)):
        # |y| should be <= ~0.75; fall back on endpoint splitting
        lo = exp_iv(x.lower(), bits)
        hi = exp_iv(x.upper(), bits)
        s = max(lo.scale, hi.scale)
        return Interval(lo.rescale(s).lo, hi.rescale(s).hi, s)
    M = (y.lo + y.hi) // 2
    hw = (y.hi - y.lo) // 2 + 1
    one = 1 << W
    term = one
    total = one
    err = 1
    j = 1
    while term:
        term = ((term * M) >> W) // j
        total += term
        err += 6
        j += 1
        if j > 4 * W:  # pragma: no cover - safety net
            raise PrecisionError("exp series failed to converge")
    err += 8  # tail: |y| <= 0.75 so the remaining ratio is < 1/2
    # input half-width via derivative exp(y) <= e^0.75 < 2.2
    err += 3 * hw
    res = Interval(total - err, total + err, W)
    return res.scalb(n)


def _sincos_taylor(M: int, W: int, kind: str) -> tuple[int, int]:
    """Taylor enclosure of sin or cos at the dyadic point M * 2**-W, |M*2^-W| <= 1.7."""
    M2 = (M * M) >> W
    if kind == "sin":
        term = M
        total = M
        j = 1
    else:
        term = 1 << W
        total = term
        j = 0
    err = 2
    while term:
        if kind == "sin":
            den = (2 * j) * (2 * j + 1)
        else:
            den = (2 * j + 1) * (2 * j + 2)
        term = -(((term * M2) >> W) // den)
        total += term
        err += 8
        j += 1
        if j > 4 * W:  # pragma: no cover
            raise PrecisionError("sin/cos series failed to converge")
    err += 8  # tail: next term ratio is below 1/2 for |M*2^-W| <= 1.7
    return total, err


def _sincos_iv(x: Union[Fraction, int, Interval], bits: int, kind: str) -> Interval:
    if not isinstance(x, Interval):
        x = Interval.from_fraction(x, bits + 32)
    xb = max(x.mag_bits(), 1)
    W = bits + xb + 48
    x = x.rescale(W)
    pi = pi_iv(W + 16)
    q = x.divide(pi, 64)
    n = (q.lo + q.hi + (1 << 64)) >> 65  # round midpoint of x/pi to nearest int
    piW = pi_iv(W + max(1, abs(n).bit_length()) + 16)
    r = (x - piW.mul_int(n)).rescale(W)
    hw = (r.hi - r.lo) // 2 + 1
    mid = (r.lo + r.hi) // 2
    if abs(mid) + hw > (27 << W) // 16:  # |r| should be < pi/2 + slack
        # very wide input; sin/cos are still bounded by 1
        return Interval(-(1 << W), 1 << W, W)
    total, err = _sincos_taylor(mid, W, kind)
    err += hw + 2  # |sin'|, |cos'| <= 1
    if n % 2:
        total = -total
    res = Interval(total - err, total + err, W)
    return res.intersect(Interval(-(1 << W), 1 << W, W))


def sin_iv(x: Union[Fraction, int, Interval], bits: int) -> Interval:
    return _sincos_iv(x, bits, "sin")


def cos_iv(x: Union[Fraction, int, Interval], bits: int) -> Interval:
    return _sincos_iv(x, bits, "cos")


def sqrt_iv(x: Union[Fraction, int, Interval], bits: int) -> Interval:
    """Enclosure of the square root of a nonnegative value."""
    W = bits + 16

    def root_lo(fr: Fraction) -> int:
        return math.isqrt((fr.numerator << (2 * W)) // fr.denominator)

    if isinstance(x, Interval):
        if x.hi < 0:
            raise ValueError("sqrt of a negative enclosure")
        lo_fr = x.lower()
        if lo_fr < 0:
            lo_fr = Fraction(0)
        lo = root_lo(lo_fr)
        hi = root_lo(x.upper()) + 1
        return Interval(lo, hi, W)
    if isinstance(x, int):
        x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of a negative value")
    lo = root_lo(x)
    return Interval(lo, lo + 1, W)


# ---------------------------------------------------------------------------
# Certified reals
# ---------------------------------------------------------------------------


class CertifiedReal:
    """A computable real carried as a refinable certified enclosure.

    ``fn(bits)`` must return an :class:`Interval` containing the value whose
    width shrinks (at least roughly like ``2**-bits``) as ``bits`` grows.
    """

    __slots__ = ("_fn", "_cache_bits", "_cache")

    def __init__(self, fn: Callable[[int], Interval]):
        self._fn = fn
        self._cache_bits = -1
        self._cache: Interval | None = None

    def enclosure(self, bits: int) -> Interval:
        if self._cache is not None and bits <= self._cache_bits:
            return self._cache
        iv = self._fn(bits)
        self._cache_bits = bits
        self._cache = iv
        return iv

    # -- arithmetic ----------------------------------------------------

    def __neg__(self) -> "CertifiedReal":
        return CertifiedReal(lambda b: -self.enclosure(b))

    def __add__(self, other) -> "CertifiedReal":
        o = to_real(other)
        return CertifiedReal(lambda b: self.enclosure(b + 4) + as_interval(o, b + 4))

    __radd__ = __add__

    def __sub__(self, other):
        o = to_real(other)
        neg = -o if isinstance(o, Fraction) else o.__neg__()
        return self + neg

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other) -> "CertifiedReal":
        o = to_real(other)

        def fn(b: int) -> Interval:
            a = self.enclosure(b + 8)
            c = as_interval(o, b + 8)
            extra = max(a.mag_bits(), 1) + max(c.mag_bits(), 1)
            a = self.enclosure(b + 8 + extra)
            c = as_interval(o, b + 8 + extra)
            return a * c

        return CertifiedReal(fn)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "CertifiedReal":
        o = to_real(other)

        def fn(b: int) -> Interval:
            num = self.enclosure(b + 8)
            den = as_interval(o, b + 8)
            k = 1
            while den.sign() is None and k <= 8:
                den = as_interval(o, (b + 8) << k)
                k += 1
            return num.divide(den, b)

        return CertifiedReal(fn)

    def __rtruediv__(self, other) -> "CertifiedReal":
        o = to_real(other)

        def fn(b: int) -> Interval:
            num = as_interval(o, b + 8)
            den = self.enclosure(b + 8)
            k = 1
            while den.sign() is None and k <= 8:
                den = self.enclosure((b + 8) << k)
                k += 1
            return num.divide(den, b)

        return CertifiedReal(fn)

    def __pow__(self, j: int) -> "CertifiedReal | Fraction":
        if not isinstance(j, int):
            raise TypeError("only integer powers of enclosures are supported")
        if j == 0:
            return Fraction(1)

        def fn(b: int) -> Interval:
            iv = self.enclosure(b + 8 * abs(j))
            lo, hi = iv.lower(), iv.upper()
            cands = [lo ** abs(j), hi ** abs(j)]
            vlo, vhi = min(cands), max(cands)
            if j % 2 == 0 and lo < 0 < hi:
                vlo = Fraction(0)
            if j < 0:
                if vlo <= 0:
                    raise ZeroDivisionError("negative power of an enclosure touching zero")
                vlo, vhi = 1 / vhi, 1 / vlo
            a = Interval.from_fraction(vlo, b)
            c = Interval.from_fraction(vhi, b)
            return Interval(a.lo, c.hi, b)

        return CertifiedReal(fn)

    def scalb(self, k: int) -> "CertifiedReal":
        return CertifiedReal(lambda b: self.enclosure(b).scalb(k))

    # -- predicates ------------------------------------------------------

    def sign(self, max_bits: int = 16384) -> int:
        bits = 64
        while bits <= max_bits:
            s = self.enclosure(bits).sign()
            if s is not None:
                return s
            bits *= 2
        raise PrecisionError(
            "cannot certify the sign of an enclosure; "
            "exact zeros must be passed as rationals"
        )

    def __float__(self) -> float:
        return float(self.enclosure(96).midpoint())

    def __repr__(self) -> str:  # pragma: no cover
        return f"CertifiedReal(~{float(self):.9g})"


ExactReal = Union[Fraction, CertifiedReal]


def to_real(v) -> ExactReal:
    """Coerce plain numbers to an ExactReal (floats convert exactly)."""
    if isinstance(v, (Fraction, CertifiedReal)):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError("cannot convert a non-finite float")
        return Fraction(v)
    raise TypeError(f"cannot interpret {type(v).__name__} as an exact real")


def as_interval(x: ExactReal, bits: int) -> Interval:
    if isinstance(x, CertifiedReal):
        return x.enclosure(bits)
    return Interval.from_fraction(x, bits)


def real_sign(x: ExactReal) -> int:
    if isinstance(x, CertifiedReal):
        return x.sign()
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def real_to_float(x) -> float:
    if isinstance(x, CertifiedReal):
        return float(x)
    if isinstance(x, Fraction):
        return float(x)
    return float(x)


def pi_real() -> CertifiedReal:
    return CertifiedReal(pi_iv)


def nth_root_fraction(x: Fraction, k: int) -> Fraction | None:
    """Exact k-th root of a nonnegative rational, or None if irrational."""
    if x < 0 or k <= 0:
        return None
    if x == 0:
        return Fraction(0)

    def iroot(n: int) -> int | None:
        if n == 0:
            return 0
        r = round(n ** (1.0 / k)) if n.bit_length() < 512 else 1 << (n.bit_length() // k)
        # Newton correction on integers
        for _ in range(128):
            if r <= 0:
                r = 1
            rk = r**k
            if rk == n:
                return r
            nr = ((k - 1) * r + n // r ** (k - 1)) // k
            if nr == r:
                break
            r = nr
        for c in (r - 1, r, r + 1):
            if c > 0 and c**k == n:
                return c
        return None

    rn = iroot(x.numerator)
    if rn is None:
        return None
    rd = iroot(x.denominator)
    if rd is None:
        return None
    return Fraction(rn, rd)
