"""The coordinatewise relative-error metric on R^d.

The metric topology splits R^d into 3^d components indexed by sign
pattern; distance is finite only within a component and equals the
Euclidean combination of per-coordinate |log| ratios.  Distances are
computed from exact coordinate ratios through certified log enclosures
(default resolution 192 bits), so they are never the dominant error
source in stability measurements.

Sampling is deterministic: sample ``i`` of a run draws from a Philox
stream with ``key=seed`` and ``counter=[0, 0, kind, i]`` (kind 0 for
ball samples, 1 for boundary samples), so runs parallelize without
coordination.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .fpcore import FpNumber
from .reals import (
    CertifiedReal,
    ExactReal,
    Interval,
    as_interval,
    exp_iv,
    log_iv,
    nth_root_fraction,
    real_sign,
    sqrt_iv,
    to_real,
)

DIST_BITS = 192
SAMPLE_BITS = 176

SignPattern = tuple[int, ...]
ExtDist = Union[Fraction, float]  # exact-rational midpoint, or math.inf


class DimensionMismatch(ValueError):
    pass


class InfiniteDistanceError(ValueError):
    pass


def _coerce(v) -> ExactReal:
    if isinstance(v, FpNumber):
        return v.to_fraction()
    return to_real(v)


class RelPoint:
    """A point of R^d together with its sign pattern (component label)."""

    __slots__ = ("coords", "pattern")

    def __init__(self, coords: Sequence):
        cs = tuple(_coerce(c) for c in coords)
        self.coords = cs
        self.pattern: SignPattern = tuple(real_sign(c) for c in cs)

    @staticmethod
    def of(*values) -> "RelPoint":
        return RelPoint(values)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def chi(self) -> tuple[int, ...]:
        """Indices of the nonzero coordinates."""
        return tuple(i for i, s in enumerate(self.pattern) if s != 0)

    def same_component(self, other: "RelPoint") -> bool:
        return self.pattern == other.pattern

    def __iter__(self):
        return iter(self.coords)

    def __repr__(self) -> str:
        vals = ", ".join(f"{float(c) if isinstance(c, Fraction) else float(c):.6g}" for c in self.coords)
        return f"RelPoint({vals})"


def _signed_interval(x: ExactReal, bits: int) -> Interval:
    iv = as_interval(x, bits)
    while iv.sign() is None:
        bits *= 2
        if bits > 1 << 22:  # pragma: no cover - guarded by RelPoint signs
            raise ArithmeticError("cannot separate a coordinate from zero")
        iv = as_interval(x, bits)
    return iv


def _log_ratio_sq(x: ExactReal, y: ExactReal, bits: int) -> Interval | None:
    """Enclosure of log(x/y)**2 for same-sign nonzero x, y; None if zero."""
    if isinstance(x, Fraction) and isinstance(y, Fraction):
        ratio = abs(x / y)
        if ratio == 1:
            return None
        lg = log_iv(ratio, bits)
    else:
        ix = _signed_interval(x, bits + 8)
        iy = _signed_interval(y, bits + 8)
        if ix.sign() < 0:
            ix, iy = -ix, -iy
        ratio_iv = ix.divide(iy, bits + 8)
        lg = log_iv(ratio_iv, bits)
    return (lg * lg).rescale(2 * bits + 16)


def rel_dist(x: RelPoint, y: RelPoint, bits: int = DIST_BITS) -> ExtDist:
    """Distance in the coordinatewise relative-error metric.

    Returns an exact-rational midpoint of a certified enclosure (or
    ``math.inf`` across components).  Identical points give exactly 0.
    """
    if x.dim != y.dim:
        raise DimensionMismatch(f"dimension mismatch: {x.dim} != {y.dim}")
    if x.pattern != y.pattern:
        return math.inf
    total: Interval | None = None
    for i in x.chi():
        sq = _log_ratio_sq(x.coords[i], y.coords[i], bits)
        if sq is None:
            continue
        total = sq if total is None else (total + sq).rescale(2 * bits + 16)
    if total is None:
        return Fraction(0)
    if total.lo < 0:
        total = Interval(0, max(total.hi, 0), total.scale)
    return sqrt_iv(total, bits).midpoint()


def abs_dist(x: RelPoint, y: RelPoint, bits: int = DIST_BITS) -> Fraction:
    """Euclidean (Frobenius) distance, for absolute-error comparisons."""
    if x.dim != y.dim:
        raise DimensionMismatch(f"dimension mismatch: {x.dim} != {y.dim}")
    exact = Fraction(0)
    iv_total: Interval | None = None
    for a, b in zip(x.coords, y.coords):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            d = a - b
            exact += d * d
        else:
            d = as_interval(a, bits + 8) - as_interval(b, bits + 8)
            sq = (d * d).rescale(2 * bits + 16)
            iv_total = sq if iv_total is None else (iv_total + sq).rescale(2 * bits + 16)
    if iv_total is None:
        if exact == 0:
            return Fraction(0)
        return sqrt_iv(exact, bits).midpoint()
    total = iv_total + Interval.from_fraction(exact, iv_total.scale)
    if total.lo < 0:
        total = Interval(0, max(total.hi, 0), total.scale)
    return sqrt_iv(total, bits).midpoint()


def geodesic_point(x: RelPoint, y: RelPoint, s, bits: int = SAMPLE_BITS) -> RelPoint:
    """Point at parameter s on the minimizing geodesic from x to y.

    Coordinatewise log-linear interpolation ``z_i = x_i (y_i/x_i)**s``;
    exact rationals are preserved whenever the power is rational.
    """
    if x.dim != y.dim:
        raise DimensionMismatch(f"dimension mismatch: {x.dim} != {y.dim}")
    if not x.same_component(y):
        raise InfiniteDistanceError("no geodesic between different components")
    sf = to_real(s)
    if not isinstance(sf, Fraction) or not (0 <= sf <= 1):
        raise ValueError("geodesic parameter must be a rational in [0, 1]")
    if sf == 0:
        return x
    if sf == 1:
        return y
    coords = []
    for i, (a, b) in enumerate(zip(x.coords, y.coords)):
        if x.pattern[i] == 0:
            coords.append(Fraction(0))
            continue
        coords.append(_interp(a, b, sf, bits))
    return RelPoint(coords)


def _interp(a: ExactReal, b: ExactReal, s: Fraction, bits: int) -> ExactReal:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        ratio = b / a
        if ratio == 1:
            return a
        root = nth_root_fraction(abs(ratio), s.denominator)
        if root is not None:
            return a * root**s.numerator

    def fn(nbits: int) -> Interval:
        ia = _signed_interval(a, nbits + 16)
        ib = _signed_interval(b, nbits + 16)
        neg = ia.sign() < 0
        if neg:
            ia, ib = -ia, -ib
        ratio_iv = ib.divide(ia, nbits + 16)
        lg = log_iv(ratio_iv, nbits + 16)
        w = (lg * Interval.from_fraction(s, nbits + 16)).rescale(nbits + 16)
        e = exp_iv(w, nbits + 16)
        out = ia * e
        return -out if neg else out

    return CertifiedReal(fn)


# ---------------------------------------------------------------------------
# Seeded sampling in metric balls
# ---------------------------------------------------------------------------


def _stream(seed: int, index: int, kind: int = 0) -> np.random.Generator:
    key = seed & ((1 << 128) - 1)
    bg = np.random.Philox(key=key, counter=[0, 0, kind, index & ((1 << 64) - 1)])
    return np.random.Generator(bg)


def _one_sample(x: RelPoint, chi: tuple[int, ...], rho: Fraction, gen, bits: int) -> RelPoint:
    while True:
        v = gen.standard_normal(len(chi))
        if np.any(v != 0.0):
            break
    vf = [Fraction(float(c)) for c in v]
    norm_sq = sum(c * c for c in vf)
    nrm = sqrt_iv(norm_sq, bits + 16)
    coords = list(x.coords)
    for j, i in enumerate(chi):
        w = Interval.from_fraction(rho * vf[j], bits + 16).divide(nrm, bits + 16)
        factor = exp_iv(w, bits + 16).midpoint()
        xi = x.coords[i]
        coords[i] = xi * factor if isinstance(xi, Fraction) else xi * factor
    return RelPoint(coords)


def rel_ball_sample(
    x: RelPoint, r, n: int, seed: int, bits: int = SAMPLE_BITS
) -> list[RelPoint]:
    """n points of the closed relative-metric ball of radius r around x.

    Construction: a standard-normal direction on the nonzero support, a
    radius uniform in [0, r), and coordinatewise exponential scaling.
    Deterministic for a given seed; the ball around an all-zero point is
    the point itself.
    """
    rf = to_real(r)
    if not isinstance(rf, Fraction) or rf < 0:
        raise ValueError("ball radius must be a finite nonnegative rational")
    chi = x.chi()
    if not chi or rf == 0:
        return [x] * n
    out = []
    for i in range(n):
        gen = _stream(seed, i, kind=0)
        ticks = int(gen.integers(0, 2**53))
        rho = rf * Fraction(ticks, 2**53)
        if rho == 0:
            out.append(x)
            continue
        out.append(_one_sample(x, chi, rho, gen, bits))
    return out


def rel_sphere_sample(
    x: RelPoint, r, n: int, seed: int, bits: int = SAMPLE_BITS, inset: Fraction = Fraction(1, 2**64)
) -> list[RelPoint]:
    """n points at relative distance ~r (shrunk by `inset` to stay inside)."""
    rf = to_real(r)
    if not isinstance(rf, Fraction) or rf <= 0:
        raise ValueError("sphere radius must be a positive rational")
    chi = x.chi()
    if not chi:
        return [x] * n
    rho = rf * (1 - inset)
    out = []
    for i in range(n):
        gen = _stream(seed, i, kind=1)
        out.append(_one_sample(x, chi, rho, gen, bits))
    return out
