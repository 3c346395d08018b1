"""Deterministic stream of (vector, tag) pairs driving the series norm.

The stream lists every finitely supported rational vector infinitely many
times, paired with a strictly increasing tag sequence of positive integers
subject to the growth rules: whenever the listed vector is nonzero, its
tag exceeds the largest support index and is at least the ceiling of its
l1 norm.

The canonical enumeration is by "height": height(0) = 1, and otherwise
height(x) = max(largest support index, max over entries p/q in lowest
terms of |p| + q).  Enumeration level L lists all vectors of height <= L
in lexicographic order of (support tuple, entry tuple); the stream is
level 1, then level 2, and so on, so each vector of height <= L recurs
once per level from L onward.  Tags take the minimal admissible value at
every step, which keeps the weights 2^(-tag^2) as large as possible.

The whole module is exact; series tails are bounded by closed-form
majorants evaluated in integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Tuple

from .errors import DepthBudgetError
from .vectors import SparseVec, l1_norm

DEFAULT_DEPTH_BUDGET = 5000

#: Number of exactly summed leading terms in every tail majorant.
EXACT_HEAD_TERMS = 50


def vector_height(x: SparseVec) -> int:
    """Enumeration height; 1 for the zero vector."""
    if x.is_zero():
        return 1
    h = x.max_support()
    for _, v in x.items():
        h = max(h, abs(v.numerator) + v.denominator)
    return h


def rational_grid(height: int) -> List[Fraction]:
    """All nonzero rationals p/q in lowest terms with |p| + q <= height, sorted."""
    out = []
    for q in range(1, height):
        for p in range(1, height - q + 1):
            if math.gcd(p, q) == 1:
                out.append(Fraction(p, q))
                out.append(Fraction(-p, q))
    out.sort()
    return out


def _supports_lex(max_index: int) -> Iterator[Tuple[int, ...]]:
    """Nonempty ascending index tuples over {1..max_index} in lex order."""

    def rec(prefix: Tuple[int, ...], start: int) -> Iterator[Tuple[int, ...]]:
        for i in range(start, max_index + 1):
            ext = prefix + (i,)
            yield ext
            yield from rec(ext, i + 1)

    yield from rec((), 1)


def iter_level(level: int) -> Iterator[SparseVec]:
    """All vectors of height <= level, in canonical order (zero first)."""
    yield SparseVec.zero()
    grid = rational_grid(level)
    if not grid:
        return
    for supp in _supports_lex(level):
        for combo in product(grid, repeat=len(supp)):
            yield SparseVec(dict(zip(supp, combo)))


def _vector_stream() -> Iterator[SparseVec]:
    level = 1
    while True:
        yield from iter_level(level)
        level += 1


def _round_up_dyadic(value: Fraction, grain_bits: int) -> Fraction:
    """Smallest multiple of 2^(-grain_bits) that is >= value."""
    num = -((-value.numerator << grain_bits) // value.denominator)
    return Fraction(num, 1 << grain_bits)


def growth_tail_majorant(m: int) -> Fraction:
    """Upper bound for sum over n >= m of (1+n) * 2^(-n^2), m >= 1.

    The first EXACT_HEAD_TERMS terms are summed exactly; the rest is
    dominated by 2*(1+M)*2^(-M^2) at M = m + EXACT_HEAD_TERMS, using
    (1+M+j) <= (1+M)*2^j and 2Mj + j^2 >= 2j for M >= 1.  The result is
    rounded up to granularity 2^(-(m+2)^2-2), which keeps denominators
    small downstream; the increase is far below the dropped head term
    (1+m)*2^(-m^2), so strict decrease in m survives the rounding.
    """
    if m < 1:
        raise ValueError("majorant requires m >= 1")
    M = m + EXACT_HEAD_TERMS
    E = M * M
    num = 0
    for n in range(m, M):
        num += (1 + n) << (E - n * n)
    num += 2 * (1 + M)
    return _round_up_dyadic(Fraction(num, 1 << E), (m + 2) * (m + 2) + 2)


def square_tail_majorant(m: int) -> Fraction:
    """Upper bound for sum over n >= m of 2^(-n^2), m >= 1.

    Exact head plus 2*2^(-M^2), from 2^(-(M+j)^2) <= 2^(-M^2) * 2^(-j);
    rounded up like :func:`growth_tail_majorant`.
    """
    if m < 1:
        raise ValueError("majorant requires m >= 1")
    M = m + EXACT_HEAD_TERMS
    E = M * M
    num = 0
    for n in range(m, M):
        num += 1 << (E - n * n)
    num += 2
    return _round_up_dyadic(Fraction(num, 1 << E), (m + 2) * (m + 2) + 2)


@dataclass(frozen=True)
class TableParams:
    """Parameters of the canonical construction (enumeration is fixed)."""

    depth_budget: int = DEFAULT_DEPTH_BUDGET

    def __post_init__(self):
        if self.depth_budget < 1:
            raise ValueError("depth_budget must be positive")


class ConstructionTable:
    """Append-only cache of the canonical (vector, tag) stream.

    Two tables with equal params produce identical prefixes.  Extension is
    lazy: ``entry(k)`` grows the cache to position k, raising
    DepthBudgetError past the depth budget.
    """

    def __init__(self, params: TableParams | None = None, depth_budget: int | None = None):
        if params is None:
            params = TableParams(depth_budget or DEFAULT_DEPTH_BUDGET)
        elif depth_budget is not None:
            raise ValueError("pass either params or depth_budget, not both")
        self.params = params
        self._vectors: List[SparseVec] = []
        self._tags: List[int] = []
        self._occurrences: Dict[SparseVec, List[int]] = {}
        self._stream = _vector_stream()
        self._tail_memo: Dict[int, Fraction] = {}

    @property
    def depth_budget(self) -> int:
        return self.params.depth_budget

    def __len__(self) -> int:
        return len(self._vectors)

    def _extend_to(self, k: int) -> None:
        if k > self.params.depth_budget:
            raise DepthBudgetError(
                f"table index {k} exceeds depth budget {self.params.depth_budget}"
            )
        while len(self._vectors) < k:
            u = next(self._stream)
            prev = self._tags[-1] if self._tags else 0
            if u.is_zero():
                tag = prev + 1
            else:
                tag = max(prev + 1, u.max_support() + 1, math.ceil(l1_norm(u)))
            # Growth rules; guaranteed by the rule above, kept as cheap checks.
            assert tag > prev
            assert u.is_zero() or (tag > u.max_support() and tag >= l1_norm(u))
            self._vectors.append(u)
            self._tags.append(tag)
            self._occurrences.setdefault(u, []).append(len(self._vectors))

    def entry(self, k: int) -> Tuple[SparseVec, int]:
        """The k-th (vector, tag) pair, 1-based; extends the cache."""
        if k < 1:
            raise ValueError("k must be >= 1")
        self._extend_to(k)
        return self._vectors[k - 1], self._tags[k - 1]

    def tag(self, k: int) -> int:
        """Tag a_k; a_0 = 0 by convention."""
        if k == 0:
            return 0
        self._extend_to(k)
        return self._tags[k - 1]

    def vector(self, k: int) -> SparseVec:
        self._extend_to(k)
        return self._vectors[k - 1]

    def prefix(self, k_max: int) -> Iterator[Tuple[int, SparseVec, int]]:
        """(k, vector, tag) for k = 1..k_max."""
        self._extend_to(k_max)
        for k in range(1, k_max + 1):
            yield k, self._vectors[k - 1], self._tags[k - 1]

    def occurrence_positions(self, x: SparseVec, k_max: int) -> List[int]:
        """Positions k <= k_max at which the stream lists x, ascending."""
        self._extend_to(k_max)
        return [k for k in self._occurrences.get(x, []) if k <= k_max]

    def tag_set(self, x: SparseVec, k_max: int) -> List[int]:
        """Tags of the occurrences of x in the first k_max stream positions."""
        return [self._tags[k - 1] for k in self.occurrence_positions(x, k_max)]

    def tail_bound(self, K: int) -> Fraction:
        """Certified upper bound for sum over k > K of (1 + a_k) * 2^(-a_k^2).

        Tags are strictly increasing integers, so the tail is dominated by
        the full integer series starting at a_K + 1.
        """
        if K < 0:
            raise ValueError("K must be >= 0")
        cached = self._tail_memo.get(K)
        if cached is None:
            cached = growth_tail_majorant(self.tag(K) + 1)
            self._tail_memo[K] = cached
        return cached

    def weight_tail_bound(
        self,
        k: int,
        head_terms: int = EXACT_HEAD_TERMS,
        grain_bits: int | None = None,
    ) -> Tuple[Fraction, Fraction]:
        """Certified (lower, upper) bounds for sum over l > k of 2^(-a_l^2).

        The lower bound sums ``head_terms`` exact table terms (fewer near
        the depth budget); the upper bound adds the square-series majorant
        from the next unseen tag on.  With ``grain_bits`` the lower bound
        is rounded down and the upper bound rounded up to multiples of
        2^(-grain_bits), which keeps denominators small without weakening
        either certificate.
        """
        J = min(k + head_terms, self.params.depth_budget)
        if J <= k:
            raise DepthBudgetError(f"no room past index {k} within budget")
        self._extend_to(J)
        E = self._tags[J - 1] ** 2
        num = 0
        for l in range(k + 1, J + 1):
            num += 1 << (E - self._tags[l - 1] ** 2)
        majorant = square_tail_majorant(self._tags[J - 1] + 1)
        if grain_bits is None:
            lower = Fraction(num, 1 << E)
            return lower, lower + majorant
        if E >= grain_bits:
            lo_num = num >> (E - grain_bits)
            hi_num = -((-num) >> (E - grain_bits))
        else:
            lo_num = hi_num = num << (grain_bits - E)
        upper = Fraction(hi_num, 1 << grain_bits) + majorant
        up_num = -((-upper.numerator << grain_bits) // upper.denominator)
        return Fraction(lo_num, 1 << grain_bits), Fraction(up_num, 1 << grain_bits)

    def growth_prefix_dyadic(self, k_max: int) -> Tuple[int, int]:
        """(num, exp) with sum over k <= k_max of (1+a_k)*2^(-a_k^2) = num/2^exp.

        Pure integer accumulation; avoids giant gcd normalizations.
        """
        self._extend_to(k_max)
        num = 0
        exp = 0
        for k in range(1, k_max + 1):
            e = self._tags[k - 1] ** 2
            num = (num << (e - exp)) + (1 + self._tags[k - 1])
            exp = e
        return num, exp


def dyadic_lt(num: int, exp: int, bound: Fraction) -> bool:
    """Exact comparison num / 2^exp < bound."""
    return num * bound.denominator < bound.numerator << exp


def canonical_table(depth_budget: int = DEFAULT_DEPTH_BUDGET) -> ConstructionTable:
    return ConstructionTable(TableParams(depth_budget))
