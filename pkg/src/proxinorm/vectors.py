"""Finitely supported sequences of exact rationals, and their pairings.

A ``SparseVec`` stores only nonzero entries, keyed by 1-based coordinate
index.  The same type carries points of the sequence space (sup-norm side)
and finitely supported functionals (l1 side); the pairing is the
coordinatewise sum of products.  Every operation here is exact: no
rounding exists anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

from .errors import InputFormatError

RationalLike = Union[Fraction, int, str]


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"not a rational value: {value!r}")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` (arbitrary-precision integers)."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputFormatError(f"bad rational literal {text!r}") from exc


def format_rational(value: Fraction) -> str:
    """Inverse of :func:`parse_rational`; integers drop the ``/1``."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class SparseVec:
    """Immutable finitely supported sequence with exact rational entries.

    Invariants: no stored entry is zero, all indices are positive integers,
    and entries are `fractions.Fraction` in lowest terms (guaranteed by the
    Fraction type itself).
    """

    __slots__ = ("_entries", "_key", "_hash")

    def __init__(self, entries: Mapping[int, RationalLike] | None = None):
        data: Dict[int, Fraction] = {}
        if entries:
            for idx, val in entries.items():
                i = int(idx)
                if i < 1:
                    raise ValueError(f"index {i} is not a positive integer")
                f = _as_fraction(val)
                if f != 0:
                    data[i] = f
        self._entries = data
        self._key: Tuple[Tuple[int, Fraction], ...] = tuple(sorted(data.items()))
        self._hash = hash(self._key)

    @staticmethod
    def unit(index: int) -> "SparseVec":
        """The coordinate vector e_index."""
        return SparseVec({index: 1})

    @staticmethod
    def zero() -> "SparseVec":
        return _ZERO

    def support(self) -> Tuple[int, ...]:
        """Sorted tuple of indices carrying nonzero entries."""
        return tuple(i for i, _ in self._key)

    def items(self) -> Iterator[Tuple[int, Fraction]]:
        return iter(self._key)

    def __getitem__(self, index: int) -> Fraction:
        return self._entries.get(index, _FRAC_ZERO)

    def __len__(self) -> int:
        return len(self._entries)

    def is_zero(self) -> bool:
        return not self._entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVec):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __add__(self, other: "SparseVec") -> "SparseVec":
        data = dict(self._entries)
        for i, v in other._entries.items():
            s = data.get(i, _FRAC_ZERO) + v
            if s == 0:
                data.pop(i, None)
            else:
                data[i] = s
        return SparseVec(data)

    def __sub__(self, other: "SparseVec") -> "SparseVec":
        return self + (-other)

    def __neg__(self) -> "SparseVec":
        return SparseVec({i: -v for i, v in self._entries.items()})

    def scale(self, factor: RationalLike) -> "SparseVec":
        f = _as_fraction(factor)
        if f == 0:
            return _ZERO
        return SparseVec({i: f * v for i, v in self._entries.items()})

    def max_support(self) -> int:
        """Largest index in the support; 0 for the zero vector."""
        return self._key[-1][0] if self._key else 0

    def restrict(self, indices: Iterable[int]) -> "SparseVec":
        keep = set(indices)
        return SparseVec({i: v for i, v in self._entries.items() if i in keep})

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {format_rational(v)}" for i, v in self._key)
        return f"SparseVec({{{body}}})"

    # -- serialization ---------------------------------------------------

    def to_json(self) -> Dict[str, str]:
        """Wire format: index string -> rational string, indices sorted."""
        return {str(i): format_rational(v) for i, v in self._key}

    @staticmethod
    def from_json(obj: object) -> "SparseVec":
        if not isinstance(obj, dict):
            raise InputFormatError(f"sparse vector must be a JSON object, got {type(obj).__name__}")
        data: Dict[int, Fraction] = {}
        for key, val in obj.items():
            try:
                idx = int(key)
            except ValueError as exc:
                raise InputFormatError(f"bad vector index {key!r}") from exc
            if idx < 1:
                raise InputFormatError(f"vector index {key!r} must be >= 1")
            if not isinstance(val, str):
                raise InputFormatError(f"entry at index {key!r} must be a rational string")
            data[idx] = parse_rational(val)
        return SparseVec(data)


_FRAC_ZERO = Fraction(0)
_ZERO = SparseVec()


def pair(x: SparseVec, phi: SparseVec) -> Fraction:
    """Exact duality pairing: sum over i of x_i * phi_i."""
    if len(phi) < len(x):
        x, phi = phi, x
    total = _FRAC_ZERO
    for i, v in x.items():
        w = phi[i]
        if w != 0:
            total += v * w
    return total


def l1_norm(x: SparseVec) -> Fraction:
    """Sum of absolute values of the entries."""
    total = _FRAC_ZERO
    for _, v in x.items():
        total += abs(v)
    return total


def sup_norm(x: SparseVec) -> Fraction:
    """Largest absolute entry; 0 for the zero vector."""
    best = _FRAC_ZERO
    for _, v in x.items():
        a = abs(v)
        if a > best:
            best = a
    return best


def sgn(t: Fraction | int) -> int:
    """Sign with the convention sgn(0) = +1."""
    return 1 if t >= 0 else -1
