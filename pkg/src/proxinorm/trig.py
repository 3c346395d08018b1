"""Certified rational interval arithmetic for sine, cosine and pi.

This is the only non-rational mathematics in the package, quarantined
here: every value is an exact rational interval guaranteed to contain the
real quantity.  Pi comes from Machin's formula with alternating-series
brackets; sine and cosine use Taylor polynomials at a dyadic center with
the Lagrange remainder (all derivatives bounded by 1) plus a Lipschitz
widening for the interval argument.  Downstream consumers use only
certified signs or rational midpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from .errors import PrecisionBudgetError

DEFAULT_TRIG_BITS = 64


@dataclass(frozen=True)
class RatInterval:
    """Closed interval with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("interval with lo > hi")

    @staticmethod
    def point(value: Fraction | int) -> "RatInterval":
        f = Fraction(value)
        return RatInterval(f, f)

    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "RatInterval":
        return RatInterval(-self.hi, -self.lo)

    def scale(self, factor: Fraction | int) -> "RatInterval":
        f = Fraction(factor)
        if f >= 0:
            return RatInterval(self.lo * f, self.hi * f)
        return RatInterval(self.hi * f, self.lo * f)

    def __mul__(self, other: "RatInterval") -> "RatInterval":
        products = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ]
        return RatInterval(min(products), max(products))

    def straddles_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def sign(self) -> int:
        """+1 or -1 when certified; raises when the interval straddles 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        raise PrecisionBudgetError("interval straddles zero; sign undetermined")


def _atan_interval(inv: int, bits: int) -> RatInterval:
    """Bracket of atan(1/inv) via the alternating Taylor series."""
    x = Fraction(1, inv)
    term = x
    total = Fraction(0)
    m = 0
    threshold = Fraction(1, 1 << (bits + 6))
    while True:
        t = term / (2 * m + 1)
        if t < threshold:
            return RatInterval(total - t, total + t)
        total += t if m % 2 == 0 else -t
        term *= x * x
        m += 1


_PI_MEMO: Dict[int, RatInterval] = {}


def pi_interval(bits: int = DEFAULT_TRIG_BITS) -> RatInterval:
    """Certified enclosure of pi with width below 2^(-bits)."""
    cached = _PI_MEMO.get(bits)
    if cached is None:
        a = _atan_interval(5, bits + 6)
        b = _atan_interval(239, bits + 6)
        cached = a.scale(16) - b.scale(4)
        assert cached.width() < Fraction(1, 1 << bits)
        _PI_MEMO[bits] = cached
    return cached


def _dyadic_round(value: Fraction, bits: int) -> Fraction:
    num = (value.numerator << bits) // value.denominator
    return Fraction(num, 1 << bits)


def _sin_taylor(c: Fraction, bits: int) -> Tuple[Fraction, Fraction]:
    """(partial sum, remainder bound) for sin at a rational |c| <= 4."""
    threshold = Fraction(1, 1 << bits)
    total = Fraction(0)
    power = c  # c^(2m+1)
    fact = 1  # (2m+1)!
    m = 0
    while True:
        bound = abs(power) / fact
        if bound < threshold:
            return total, bound
        total += power / fact if m % 2 == 0 else -power / fact
        power *= c * c
        fact *= (2 * m + 2) * (2 * m + 3)
        m += 1


def _cos_taylor(c: Fraction, bits: int) -> Tuple[Fraction, Fraction]:
    threshold = Fraction(1, 1 << bits)
    total = Fraction(0)
    power = Fraction(1)  # c^(2m)
    fact = 1  # (2m)!
    m = 0
    while True:
        bound = abs(power) / fact
        if bound < threshold:
            return total, bound
        total += power / fact if m % 2 == 0 else -power / fact
        power *= c * c
        fact *= (2 * m + 1) * (2 * m + 2)
        m += 1


def sin_enclosure(theta: RatInterval, bits: int = DEFAULT_TRIG_BITS) -> RatInterval:
    """Certified enclosure of sin over the angle interval (|angle| <= 4)."""
    c = _dyadic_round(theta.midpoint(), bits + 8)
    if abs(c) > 4:
        raise ValueError("angle out of the supported range")
    s, r = _sin_taylor(c, bits + 4)
    dev = max(c - theta.lo, theta.hi - c)  # |sin| is 1-Lipschitz
    return RatInterval(s - r - dev, s + r + dev)


def cos_enclosure(theta: RatInterval, bits: int = DEFAULT_TRIG_BITS) -> RatInterval:
    """Certified enclosure of cos over the angle interval (|angle| <= 4)."""
    c = _dyadic_round(theta.midpoint(), bits + 8)
    if abs(c) > 4:
        raise ValueError("angle out of the supported range")
    s, r = _cos_taylor(c, bits + 4)
    dev = max(c - theta.lo, theta.hi - c)
    return RatInterval(s - r - dev, s + r + dev)


def base_angles(n: int, bits: int = DEFAULT_TRIG_BITS) -> List[RatInterval]:
    """Angles r * pi / (2n + 2) for r = 0 .. n + 1 (equally spaced fan)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pi = pi_interval(bits + 4)
    return [pi.scale(Fraction(r, 2 * n + 2)) for r in range(n + 2)]


def fan_angles(n: int, bits: int = DEFAULT_TRIG_BITS) -> List[RatInterval]:
    """Midpoint angles (2r - 1) * pi / (4n + 4) for r = 1 .. n + 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pi = pi_interval(bits + 4)
    return [pi.scale(Fraction(2 * r - 1, 4 * n + 4)) for r in range(1, n + 2)]
