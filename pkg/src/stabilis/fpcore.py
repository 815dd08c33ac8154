"""Idealized binary floating-point arithmetic with unbounded exponents.

Numbers are sign/mantissa/exponent triples over arbitrary-size integers;
a value is ``sign * mantissa * 2**(exponent - mantissa.bit_length())``, so
the exponent names the binade: ``2**(e-1) <= |value| < 2**e``.  There are
no exponent bounds, subnormals, infinities or NaNs: every rounding is the
mathematical round-to-nearest (ties to even) onto the precision-t grid.

The arithmetic here is a genuine soft-float implementation (aligned
addition with a sticky path, double-width multiplication, division by
integer quotient and remainder).  The test-suite checks every operation
bit-for-bit against the independent compute-exactly-then-round oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .reals import CertifiedReal, PrecisionError


class FpError(ArithmeticError):
    """Base class for floating-point evaluation failures."""


class FpDivisionByZero(FpError):
    """Division by zero; the harness treats the run as non-halting."""


@dataclass(frozen=True)
class Precision:
    """Working precision: t mantissa bits, unit roundoff u = 2**-t."""

    t: int

    def __post_init__(self):
        if not isinstance(self.t, int) or self.t <= 2:
            raise ValueError("precision requires an integer t > 2")

    @property
    def u(self) -> Fraction:
        return Fraction(1, 1 << self.t)

    @staticmethod
    def of(p: "Precision | int") -> "Precision":
        return p if isinstance(p, Precision) else Precision(int(p))


class FpNumber:
    """An element of the unbounded-exponent floating-point system.

    Instances are immutable after construction (they are hashable and
    safe to share across workers).
    """

    __slots__ = ("sign", "mantissa", "exponent")

    def __init__(self, sign: int, mantissa: int, exponent: int):
        if mantissa < 0:
            raise ValueError("mantissa must be nonnegative")
        if mantissa == 0:
            sign, exponent = 1, 0
        elif sign not in (-1, 1):
            raise ValueError("sign must be -1 or +1")
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("FpNumber is immutable")

    # -- basic queries ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def precision_bits(self) -> int:
        """Mantissa width; equals t for values produced at precision t."""
        return self.mantissa.bit_length()

    def to_fraction(self) -> Fraction:
        if self.mantissa == 0:
            return Fraction(0)
        k = self.exponent - self.mantissa.bit_length()
        if k >= 0:
            return Fraction(self.sign * (self.mantissa << k))
        return Fraction(self.sign * self.mantissa, 1 << -k)

    def __float__(self) -> float:
        if self.mantissa == 0:
            return 0.0
        return float(self.to_fraction())

    def as_exact_string(self) -> str:
        """Exact `m*2^e` form (used for bit-exact serialization)."""
        if self.mantissa == 0:
            return "0"
        k = self.exponent - self.mantissa.bit_length()
        return f"{self.sign * self.mantissa}*2^{k}"

    def _key(self) -> tuple[int, int, int]:
        if self.mantissa == 0:
            return (0, 0, 0)
        m = self.mantissa
        tz = (m & -m).bit_length() - 1
        return (self.sign, m >> tz, self.exponent)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpNumber):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def _cmp(self, other: "FpNumber") -> int:
        a, b = self, other
        if a.is_zero and b.is_zero:
            return 0
        sa = 0 if a.is_zero else a.sign
        sb = 0 if b.is_zero else b.sign
        if sa != sb:
            return -1 if sa < sb else 1
        # same nonzero sign: compare magnitudes
        c = 0
        if a.exponent != b.exponent:
            c = -1 if a.exponent < b.exponent else 1
        else:
            la, lb = a.mantissa.bit_length(), b.mantissa.bit_length()
            x, y = a.mantissa << lb, b.mantissa << la
            c = -1 if x < y else (0 if x == y else 1)
        return c if sa > 0 else -c

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __neg__(self) -> "FpNumber":
        if self.is_zero:
            return self
        return FpNumber(-self.sign, self.mantissa, self.exponent)

    def __abs__(self) -> "FpNumber":
        if self.is_zero or self.sign > 0:
            return self
        return FpNumber(1, self.mantissa, self.exponent)

    def __repr__(self) -> str:
        if self.is_zero:
            return "FpNumber(0)"
        return f"FpNumber({self.as_exact_string()})"


def fp_zero() -> FpNumber:
    return FpNumber(1, 0, 0)


# ---------------------------------------------------------------------------
# Rounding
# ---------------------------------------------------------------------------


def _round_scaled(sign: int, m: int, twoexp: int, t: int, exact: bool = True) -> FpNumber:
    """Round sign*m*2**twoexp to t bits (round-to-nearest, ties to even).

    With ``exact=False`` the true magnitude lies strictly inside
    ``(m, m+1) * 2**twoexp``; ties are then impossible and the nearest
    value is decided by the remainder alone.  Callers on the inexact path
    guarantee m has more than t bits.
    """
    L = m.bit_length()
    drop = L - t
    if drop <= 0:
        if not exact:
            raise AssertionError("inexact rounding needs guard bits")
        return FpNumber(sign, m << -drop, twoexp + L)
    keep = m >> drop
    rem = m - (keep << drop)
    half = 1 << (drop - 1)
    if exact:
        if rem > half or (rem == half and keep & 1):
            keep += 1
    else:
        if rem >= half:
            keep += 1
    if keep == (1 << t):
        return FpNumber(sign, 1 << (t - 1), twoexp + L + 1)
    return FpNumber(sign, keep, twoexp + L)


def _round_fraction(x: Fraction, t: int) -> FpNumber:
    num, den = x.numerator, x.denominator
    sign = 1 if num > 0 else -1
    n = abs(num)
    if den == 1:
        return _round_scaled(sign, n, 0, t)
    E = n.bit_length() - den.bit_length()
    # adjust so that 2**(E-1) <= n/den < 2**E
    if E >= 0:
        if n >= den << E:
            E += 1
    else:
        if n << -E >= den:
            E += 1
    shift = t - E
    N = n << shift if shift >= 0 else n
    D = den if shift >= 0 else den << -shift
    q, r = divmod(N, D)
    if r == 0:
        return _round_scaled(sign, q, E - t, t)
    two_r = 2 * r
    if two_r > D or (two_r == D and q & 1):
        q += 1
    if q == (1 << t):
        return FpNumber(sign, 1 << (t - 1), E + 1)
    return FpNumber(sign, q, E)


_ZIV_MAX_BITS = 1 << 22


def round_to_nearest(x, p: Precision | int) -> FpNumber:
    """The roundoff map onto the precision-t grid (ties to even).

    Accepts integers, exact Fractions, floats (converted exactly),
    FpNumbers, and certified enclosures of irrational reals.  Enclosures
    are refined with doubled guard bits until both endpoints round to the
    same grid point.
    """
    p = Precision.of(p)
    t = p.t
    if isinstance(x, FpNumber):
        if x.is_zero:
            return x
        if x.precision_bits <= t:
            return x
        return _round_scaled(x.sign, x.mantissa, x.exponent - x.precision_bits, t)
    if isinstance(x, bool):  # pragma: no cover - guard against bool/int confusion
        x = int(x)
    if isinstance(x, int):
        if x == 0:
            return fp_zero()
        return _round_scaled(1 if x > 0 else -1, abs(x), 0, t)
    if isinstance(x, float):
        x = Fraction(x)
    if isinstance(x, Fraction):
        if x == 0:
            return fp_zero()
        return _round_fraction(x, t)
    if isinstance(x, CertifiedReal):
        bits = t + 64
        while bits <= _ZIV_MAX_BITS:
            iv = x.enclosure(bits)
            s = iv.sign()
            if s == 0:
                return fp_zero()
            if s is not None:
                lo = _round_fraction(iv.lower(), t)
                hi = _round_fraction(iv.upper(), t)
                if lo == hi:
                    return lo
            bits *= 2
        raise PrecisionError(
            "enclosure too wide to round; re-evaluate the input with more guard bits"
        )
    raise TypeError(f"cannot round a {type(x).__name__}")


fl = round_to_nearest


def to_exact(a: FpNumber) -> Fraction:
    """Exact rational value of a floating-point number."""
    return a.to_fraction()


# ---------------------------------------------------------------------------
# Arithmetic
# ---------------------------------------------------------------------------


def fp_add(a: FpNumber, b: FpNumber, p: Precision | int) -> FpNumber:
    p = Precision.of(p)
    t = p.t
    if a.is_zero:
        return round_to_nearest(b, p)
    if b.is_zero:
        return round_to_nearest(a, p)
    ea = a.exponent - a.precision_bits
    eb = b.exponent - b.precision_bits
    if ea >= eb:
        hi, lo, ehi, elo = a, b, ea, eb
    else:
        hi, lo, ehi, elo = b, a, eb, ea
    shift = ehi - elo
    G = t + 4
    if shift <= G + lo.precision_bits:
        v = hi.sign * (hi.mantissa << shift) + lo.sign * lo.mantissa
        if v == 0:
            return fp_zero()
        sign = 1 if v > 0 else -1
        return _round_scaled(sign, abs(v), elo, t)
    # the low operand is far below the rounding bits: sticky path
    if hi.sign == lo.sign:
        m = hi.mantissa << G
    else:
        m = (hi.mantissa << G) - 1
    return _round_scaled(hi.sign, m, ehi - G, t, exact=False)


def fp_sub(a: FpNumber, b: FpNumber, p: Precision | int) -> FpNumber:
    return fp_add(a, -b, p)


def fp_mul(a: FpNumber, b: FpNumber, p: Precision | int) -> FpNumber:
    p = Precision.of(p)
    if a.is_zero or b.is_zero:
        return fp_zero()
    sign = a.sign * b.sign
    m = a.mantissa * b.mantissa
    twoexp = (a.exponent - a.precision_bits) + (b.exponent - b.precision_bits)
    return _round_scaled(sign, m, twoexp, p.t)


def fp_div(a: FpNumber, b: FpNumber, p: Precision | int) -> FpNumber:
    p = Precision.of(p)
    t = p.t
    if b.is_zero:
        raise FpDivisionByZero("floating-point division by zero")
    if a.is_zero:
        return fp_zero()
    sign = a.sign * b.sign
    k = t + 2 - a.precision_bits + b.precision_bits
    N = a.mantissa << k if k >= 0 else a.mantissa
    D = b.mantissa if k >= 0 else b.mantissa << -k
    q, r = divmod(N, D)
    twoexp = (a.exponent - a.precision_bits) - (b.exponent - b.precision_bits) - k
    if r == 0:
        return _round_scaled(sign, q, twoexp, t)
    return _round_scaled(sign, q, twoexp, t, exact=False)
