"""Closed-form one-sided directional derivatives of the norms.

The sup-norm derivative is an exact finite max/min over the maximizing
coordinates; the series-norm derivative adds one exactly signed term per
table entry, so enclosures carry a two-sided truncation radius (signed
tail terms), unlike the one-sided norm enclosures.  Signs are always
computed from exact rational pairings, never from intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict

from .bits import bits_for_target
from .construction import ConstructionTable
from .errors import InputFormatError, PreconditionError
from .norms import PRECISION_CAP, _minimal_depth
from .vectors import SparseVec, format_rational, l1_norm, pair, parse_rational, sgn, sup_norm


@dataclass(frozen=True)
class DerivativeEnclosure:
    """Interval certified to contain a one-sided directional derivative."""

    lo: Fraction
    hi: Fraction
    depth: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("enclosure with lo > hi")

    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def sign_status(self) -> str:
        if self.lo > 0:
            return "positive"
        if self.hi < 0:
            return "negative"
        return "straddles_zero"

    def reflected(self) -> "DerivativeEnclosure":
        return DerivativeEnclosure(-self.hi, -self.lo, self.depth)

    def to_json(self) -> Dict[str, object]:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "depth": self.depth,
            "sign": self.sign_status,
        }

    @staticmethod
    def from_json(obj: object) -> "DerivativeEnclosure":
        if not isinstance(obj, dict):
            raise InputFormatError("derivative enclosure must be a JSON object")
        for field in ("lo", "hi", "depth"):
            if field not in obj:
                raise InputFormatError(f"derivative enclosure missing field {field!r}")
        enc = DerivativeEnclosure(
            parse_rational(obj["lo"]), parse_rational(obj["hi"]), int(obj["depth"])
        )
        if "sign" in obj and obj["sign"] != enc.sign_status:
            raise InputFormatError("sign field inconsistent with lo/hi")
        return enc


def dplus_sup(x: SparseVec, u: SparseVec) -> Fraction:
    """Right derivative of the sup norm at x in direction u (exact).

    At x = 0 this is sup_norm(u).  Otherwise only the coordinates where
    |x_n| attains the sup matter: the result is the largest |u_n| among
    those moving outward (u_n x_n > 0), or minus the smallest |u_n| among
    the rest.  A zero direction entry at the only maximizing coordinate
    lands in the second case and yields 0.
    """
    if x.is_zero():
        return sup_norm(u)
    m = sup_norm(x)
    outward = []
    inward = []
    for i, v in x.items():
        if abs(v) == m:
            ui = u[i]
            if ui * v > 0:
                outward.append(abs(ui))
            else:
                inward.append(abs(ui))
    if outward:
        return max(outward)
    return -min(inward)


def dplus_abs_pairing(phi: SparseVec, x: SparseVec, u: SparseVec) -> Fraction:
    """Right derivative of t -> |<x + t u, phi>| at t = 0 (exact)."""
    pu = pair(u, phi)
    return abs(pu) * sgn(pu * pair(x, phi))


def term_lipschitz(table: ConstructionTable, k: int) -> Fraction:
    """Lipschitz constant of the k-th summand of the norm.

    1 for the sup-norm part (k = 0); otherwise the weight times the l1
    norm of u_k - e_{a_k}, which is 1 + l1(u_k) since the tag lies off
    the support.
    """
    if k < 0:
        raise PreconditionError("k must be >= 0")
    if k == 0:
        return Fraction(1)
    u, a = table.entry(k)
    return Fraction(1 + l1_norm(u), 1) / (1 << a * a)


def derivative_series_sum(
    table: ConstructionTable, x: SparseVec, u: SparseVec, depth: int
) -> Fraction:
    """Exact signed sum over k <= depth of the derivative series terms.

    Term k is 2^(-a_k^2) * s_k * |<u, w_k>| with w_k = u_k - e_{a_k} and
    s_k the sign of <u, w_k> * <x, w_k> (sign of 0 counts +1).
    """
    terms = []  # (signed numerator, denominator, tag^2)
    lcm_q = 1
    for k in range(1, depth + 1):
        uk, a = table.entry(k)
        pu = pair(u, uk) - u[a]
        if pu == 0:
            continue
        px = pair(x, uk) - x[a]
        signed = abs(pu.numerator) * sgn(pu * px)
        terms.append((signed, pu.denominator, a * a))
        lcm_q = lcm_q * pu.denominator // gcd(lcm_q, pu.denominator)
    if not terms:
        return Fraction(0)
    E = max(e for _, _, e in terms)
    num = 0
    for pn, q, e in terms:
        num += pn * (lcm_q // q) << (E - e)
    if num == 0:
        return Fraction(0)
    shift = min((num & -num).bit_length() - 1, E)
    return Fraction(num >> shift, lcm_q << (E - shift))


def dplus_enclosure_at_depth(
    table: ConstructionTable, x: SparseVec, u: SparseVec, depth: int
) -> DerivativeEnclosure:
    """Right-derivative enclosure of the series norm at fixed depth."""
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    center = dplus_sup(x, u) + derivative_series_sum(table, x, u, depth)
    radius = sup_norm(u) * table.tail_bound(depth)
    return DerivativeEnclosure(center - radius, center + radius, depth)


def dplus_norm(
    table: ConstructionTable,
    x: SparseVec,
    u: SparseVec,
    precision_bits: int = 64,
) -> DerivativeEnclosure:
    """Right derivative of the series norm, width < 2^(-precision_bits)."""
    if precision_bits < 1 or precision_bits > PRECISION_CAP:
        raise PreconditionError(f"precision_bits must be in [1, {PRECISION_CAP}]")
    depth = _minimal_depth(table, 2 * sup_norm(u), precision_bits)
    return dplus_enclosure_at_depth(table, x, u, depth)


def dminus_norm(
    table: ConstructionTable,
    x: SparseVec,
    u: SparseVec,
    precision_bits: int = 64,
) -> DerivativeEnclosure:
    """Left derivative: the reflection -d_plus(x; -u), interval-wise."""
    return dplus_norm(table, x, -u, precision_bits).reflected()


def dplus_norm_for_width(
    table: ConstructionTable, x: SparseVec, u: SparseVec, width: Fraction
) -> DerivativeEnclosure:
    """Right-derivative enclosure with width strictly below a rational target."""
    if width <= 0:
        raise PreconditionError("width target must be positive")
    return dplus_norm(table, x, u, bits_for_target(width))
