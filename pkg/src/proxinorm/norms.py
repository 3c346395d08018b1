"""Certified evaluation of the series norm.

The norm of x is its sup norm plus the weighted series of pairing
magnitudes |<x, u_k - e_{a_k}>| with weights 2^(-a_k^2) over the
construction table.  Partial sums are exact rationals; the only error
source is truncation, and it is one-sided, so an enclosure is always
[S_K, S_K + T_K] with T_K = sup_norm(x) * tail_bound(K).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, Optional, Tuple

from .bits import bits_for_target
from .construction import ConstructionTable
from .errors import DepthBudgetError, InputFormatError, PreconditionError
from .vectors import SparseVec, format_rational, pair, parse_rational, sup_norm

DEFAULT_PRECISION_BITS = 64
PRECISION_CAP = 1 << 20
DEFAULT_COMPARISON_CAP_BITS = 8192


@dataclass(frozen=True)
class Enclosure:
    """Exact rational interval [lo, hi] for a series value, with its
    truncation depth.  lo is always the exact partial sum."""

    lo: Fraction
    hi: Fraction
    depth: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("enclosure with lo > hi")

    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi

    def intersects(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def to_json(self) -> Dict[str, object]:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "depth": self.depth,
        }

    @staticmethod
    def from_json(obj: object) -> "Enclosure":
        if not isinstance(obj, dict):
            raise InputFormatError("enclosure must be a JSON object")
        for field in ("lo", "hi", "depth"):
            if field not in obj:
                raise InputFormatError(f"enclosure missing field {field!r}")
        return Enclosure(
            parse_rational(obj["lo"]), parse_rational(obj["hi"]), int(obj["depth"])
        )


def series_partial_sum(table: ConstructionTable, x: SparseVec, depth: int) -> Fraction:
    """Exact sum over k <= depth of 2^(-a_k^2) * |<x, u_k - e_{a_k}>|.

    Accumulated over a common denominator in integer arithmetic so the
    Fraction normalization happens once.
    """
    terms = []  # (|numerator|, odd denominator part, tag^2)
    lcm_q = 1
    for k in range(1, depth + 1):
        u, a = table.entry(k)
        p = pair(x, u) - x[a]
        if p == 0:
            continue
        q = p.denominator
        terms.append((abs(p.numerator), q, a * a))
        lcm_q = lcm_q * q // gcd(lcm_q, q)
    if not terms:
        return Fraction(0)
    E = max(e for _, _, e in terms)
    num = 0
    for pn, q, e in terms:
        num += pn * (lcm_q // q) << (E - e)
    shift = min((num & -num).bit_length() - 1, E)
    return Fraction(num >> shift, lcm_q << (E - shift))


def enclosure_at_depth(table: ConstructionTable, x: SparseVec, depth: int) -> Enclosure:
    """Norm enclosure at a fixed truncation depth (deterministic)."""
    if depth < 1:
        raise PreconditionError("depth must be >= 1")
    s = sup_norm(x)
    lo = s + series_partial_sum(table, x, depth)
    return Enclosure(lo, lo + s * table.tail_bound(depth), depth)


def _minimal_depth(table: ConstructionTable, scale: Fraction, precision_bits: int) -> int:
    """Minimal K >= 1 with scale * tail_bound(K) < 2^(-precision_bits)."""
    if scale == 0:
        return 1
    target = Fraction(1, 1 << precision_bits) / scale

    def ok(K: int) -> bool:
        return table.tail_bound(K) < target

    lo, K = 0, 1
    while not ok(K):
        if K >= table.depth_budget:
            raise DepthBudgetError(
                f"depth budget {table.depth_budget} cannot reach 2^-{precision_bits}"
            )
        lo, K = K, min(2 * K, table.depth_budget)
    while lo + 1 < K:  # minimal depth in (lo, K]; ok(K) holds, ok(lo) fails
        mid = (lo + K) // 2
        if ok(mid):
            K = mid
        else:
            lo = mid
    return K


def norm_enclosure(
    table: ConstructionTable, x: SparseVec, precision_bits: int = DEFAULT_PRECISION_BITS
) -> Enclosure:
    """Certified enclosure of the series norm with width < 2^(-precision_bits)."""
    if precision_bits < 1 or precision_bits > PRECISION_CAP:
        raise PreconditionError(f"precision_bits must be in [1, {PRECISION_CAP}]")
    depth = _minimal_depth(table, sup_norm(x), precision_bits)
    return enclosure_at_depth(table, x, depth)


def norm_enclosure_for_width(
    table: ConstructionTable, x: SparseVec, width: Fraction
) -> Enclosure:
    """Enclosure with width strictly below the given rational target."""
    if width <= 0:
        raise PreconditionError("width target must be positive")
    return norm_enclosure(table, x, bits_for_target(width))


def equivalence_check(
    table: ConstructionTable, x: SparseVec, precision_bits: int = DEFAULT_PRECISION_BITS
) -> bool:
    """Certified two-sided comparison against the sup norm:
    sup_norm(x) <= lo and hi <= 3 * sup_norm(x)."""
    if x.is_zero():
        raise PreconditionError("equivalence_check requires x != 0")
    enc = norm_enclosure(table, x, precision_bits)
    s = sup_norm(x)
    return enc.lo >= s and enc.hi <= 3 * s


def norm_difference_sign(
    table: ConstructionTable,
    x: SparseVec,
    y: SparseVec,
    precision_bits: int = DEFAULT_PRECISION_BITS,
    max_precision_bits: int = DEFAULT_COMPARISON_CAP_BITS,
) -> Tuple[str, Optional[Fraction]]:
    """Certified strict comparison of the norms of x and y.

    Returns ("less", None) when hi(norm x) < lo(norm y) at some precision,
    ("greater", None) symmetrically, else ("unknown", residual) where
    residual is the remaining interval overlap at the deepest precision
    tried.  Identical inputs short-circuit to "unknown".
    """
    p = precision_bits
    residual: Optional[Fraction] = None
    while True:
        ex = norm_enclosure(table, x, p)
        ey = norm_enclosure(table, y, p)
        if ex.hi < ey.lo:
            return "less", None
        if ey.hi < ex.lo:
            return "greater", None
        residual = min(ex.hi, ey.hi) - max(ex.lo, ey.lo)
        if x == y or p >= max_precision_bits:
            return "unknown", residual
        p = min(2 * p, max_precision_bits)
