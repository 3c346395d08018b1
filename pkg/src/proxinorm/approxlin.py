"""Approximate linearity of the norm derivative on tag-index sets.

Given a base point x and finitely many distinct probe vectors z_j with
exact nonzero pairings <x, z_j>, the derivative of the norm in directions
supported on the probes' tag indices is approximately the functional
gamma with gamma_i = -sgn(<x, z_j>) * 2^(-a_k^2) at i = a_k, up to a
relative error eps_i that decays like the weight ratio of consecutive
tags.  The report materializes a finite prefix of that structure:

* tag indices of each probe's occurrences up to a stream depth,
* the excluded indices (with reasons) that the derivative bound needs,
* gamma on the usable indices,
* certified lower and upper bounds for eps_i (the true value is an
  infinite series).

Each consumer picks the eps bound on the safe side of its inequality:
verification of the linearity bound uses the lower bound (so a reported
pass is rigorous), while sign conclusions use the upper bound (so a
reported sign guarantee is rigorous).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .construction import ConstructionTable
from .errors import HypothesisError, InputFormatError, PreconditionError
from .gateaux import dplus_norm_for_width
from .linalg import LinearSystem, feasible
from .norms import Enclosure
from .vectors import (
    SparseVec,
    format_rational,
    pair,
    parse_rational,
    sgn,
    sup_norm,
)

REASON_SUP_ACTIVE = "sup-active"
REASON_PROBE_SUPPORT = "probe-support"
REASON_DOMINATED = "probe-dominated"


@dataclass
class Trial:
    """One verification of the linearity bound in a direction v."""

    v: SparseVec
    lhs: Enclosure
    rhs: Fraction
    passed: bool

    def to_json(self) -> Dict[str, object]:
        return {
            "v": self.v.to_json(),
            "lhs": self.lhs.to_json(),
            "rhs": format_rational(self.rhs),
            "pass": self.passed,
        }


@dataclass
class LinearityReport:
    """Finite-prefix witness of approximate linearity around x."""

    x: SparseVec
    probes: List[SparseVec]
    depth: int
    index_position: Dict[int, int]  # tag index -> stream position k
    block: Dict[int, int]  # tag index -> probe number (0-based)
    usable: Tuple[int, ...]  # tag indices after exclusions, sorted
    excluded: Dict[int, List[str]]  # tag index -> exclusion reasons
    gamma: Dict[int, Fraction]
    eps_lo: Dict[int, Fraction]
    eps_hi: Dict[int, Fraction]
    trials: List[Trial] = field(default_factory=list)

    def gamma_vec(self) -> SparseVec:
        return SparseVec(self.gamma)

    def probe_sign(self, j: int) -> int:
        return sgn(pair(self.x, self.probes[j]))

    def to_json(self) -> Dict[str, object]:
        return {
            "x": self.x.to_json(),
            "probes": [z.to_json() for z in self.probes],
            "depth": self.depth,
            "indices": {str(i): k for i, k in sorted(self.index_position.items())},
            "block": {str(i): j for i, j in sorted(self.block.items())},
            "usable": list(self.usable),
            "excluded": {str(i): r for i, r in sorted(self.excluded.items())},
            "gamma": {str(i): format_rational(g) for i, g in sorted(self.gamma.items())},
            "eps_lower": {str(i): format_rational(e) for i, e in sorted(self.eps_lo.items())},
            "eps_upper": {str(i): format_rational(e) for i, e in sorted(self.eps_hi.items())},
            "trials": [t.to_json() for t in self.trials],
        }

    @staticmethod
    def from_json(obj: object) -> "LinearityReport":
        if not isinstance(obj, dict):
            raise InputFormatError("report must be a JSON object")
        try:
            return LinearityReport(
                x=SparseVec.from_json(obj["x"]),
                probes=[SparseVec.from_json(z) for z in obj["probes"]],
                depth=int(obj["depth"]),
                index_position={int(i): int(k) for i, k in obj["indices"].items()},
                block={int(i): int(j) for i, j in obj["block"].items()},
                usable=tuple(int(i) for i in obj["usable"]),
                excluded={int(i): list(r) for i, r in obj["excluded"].items()},
                gamma={int(i): parse_rational(g) for i, g in obj["gamma"].items()},
                eps_lo={int(i): parse_rational(e) for i, e in obj["eps_lower"].items()},
                eps_hi={int(i): parse_rational(e) for i, e in obj["eps_upper"].items()},
            )
        except KeyError as exc:
            raise InputFormatError(f"report missing field {exc.args[0]!r}") from exc


def build_report(
    table: ConstructionTable,
    x: SparseVec,
    probes: Sequence[SparseVec],
    depth: int,
) -> LinearityReport:
    """Materialize the approximate-linearity structure up to a stream depth.

    Requires exact nonzero pairings <x, z_j> and pairwise distinct probes.
    Exclusions (with reasons) follow the derivative-bound bookkeeping:
    indices where |x_i| attains the sup norm, indices inside any probe's
    support, and occurrence tags dominated by the coordinate of x there
    (|x_{a_k}| >= |<x, z_j>| for the probe listed at position k).
    """
    if not probes:
        raise PreconditionError("at least one probe vector is required")
    if len(set(probes)) != len(probes):
        raise PreconditionError("probe vectors must be pairwise distinct")
    pairings: List[Fraction] = []
    for j, z in enumerate(probes):
        p = pair(x, z)
        if p == 0:
            raise HypothesisError(f"probe {j} pairs to zero with the base point")
        pairings.append(p)

    smax = sup_norm(x)
    sup_active = {i for i, v in x.items() if abs(v) == smax}
    probe_support = set()
    for z in probes:
        probe_support.update(z.support())

    index_position: Dict[int, int] = {}
    block: Dict[int, int] = {}
    excluded: Dict[int, List[str]] = {}
    usable: List[int] = []
    gamma: Dict[int, Fraction] = {}
    eps_lo: Dict[int, Fraction] = {}
    eps_hi: Dict[int, Fraction] = {}

    for j, z in enumerate(probes):
        for k in table.occurrence_positions(z, depth):
            i = table.tag(k)
            index_position[i] = k
            block[i] = j
            reasons = []
            if i in sup_active:
                reasons.append(REASON_SUP_ACTIVE)
            if i in probe_support:
                reasons.append(REASON_PROBE_SUPPORT)
            if abs(x[i]) >= abs(pairings[j]):
                reasons.append(REASON_DOMINATED)
            if reasons:
                excluded[i] = reasons
                continue
            usable.append(i)
            weight = Fraction(1, 1 << i * i)
            gamma[i] = -sgn(pairings[j]) * weight
            # eps values sit near 2^(-2i); the grain keeps ~2i+16
            # significant bits, so ordering and positivity survive.
            lo, hi = table.weight_tail_bound(k, grain_bits=i * i + 4 * i + 16)
            eps_lo[i] = lo / weight
            eps_hi[i] = hi / weight

    return LinearityReport(
        x=x,
        probes=list(probes),
        depth=depth,
        index_position=index_position,
        block=block,
        usable=tuple(sorted(usable)),
        excluded=excluded,
        gamma=gamma,
        eps_lo=eps_lo,
        eps_hi=eps_hi,
    )


def _check_direction(report: LinearityReport, v: SparseVec) -> None:
    outside = set(v.support()) - set(report.usable)
    if outside:
        raise PreconditionError(
            f"direction supported outside the usable indices: {sorted(outside)}"
        )


def error_budget(report: LinearityReport, v: SparseVec, upper: bool) -> Fraction:
    """Sum of eps_i * |v_i * gamma_i| with the chosen eps bound."""
    eps = report.eps_hi if upper else report.eps_lo
    total = Fraction(0)
    for i, vi in v.items():
        total += eps[i] * abs(vi * report.gamma[i])
    return total


def verify_linearity_bound(
    table: ConstructionTable,
    x: SparseVec,
    report: LinearityReport,
    v: SparseVec,
    precision_bits: int = 64,
) -> Tuple[Enclosure, Fraction, bool]:
    """Certify |d_plus(x; v) - <v, gamma>| <= sum eps_i |v_i gamma_i|.

    The right side uses the certified lower eps bound, so a pass is a
    rigorous verification of the bound with the true error sequence.  The
    derivative enclosure is refined well below the right side when
    possible, so slack is not lost to truncation.
    """
    _check_direction(report, v)
    rhs = error_budget(report, v, upper=False)
    gv = pair(v, report.gamma_vec())
    width = Fraction(1, 1 << precision_bits)
    if rhs > 0:
        width = min(width, rhs / 16)
    if v.is_zero():
        lhs = Enclosure(Fraction(0), Fraction(0), 1)
        trial = Trial(v, lhs, rhs, True)
        report.trials.append(trial)
        return lhs, rhs, True
    denc = dplus_norm_for_width(table, x, v, width)
    lo, hi = denc.lo - gv, denc.hi - gv
    if lo > 0:
        alo, ahi = lo, hi
    elif hi < 0:
        alo, ahi = -hi, -lo
    else:
        alo, ahi = Fraction(0), max(hi, -lo)
    lhs = Enclosure(alo, ahi, denc.depth)
    passed = ahi <= rhs
    report.trials.append(Trial(v, lhs, rhs, passed))
    return lhs, rhs, passed


def sign_coherence(
    table: ConstructionTable,
    x: SparseVec,
    report: LinearityReport,
    v: SparseVec,
) -> bool:
    """Exact test |<v, gamma>| > sum eps_i |v_i gamma_i| (upper eps bound).

    When true, both one-sided derivatives of the norm at x along v are
    nonzero with the sign of <v, gamma>.
    """
    _check_direction(report, v)
    return abs(pair(v, report.gamma_vec())) > error_budget(report, v, upper=True)


def coherence_margin(report: LinearityReport, v: SparseVec) -> Fraction:
    """|<v, gamma>| - sum eps_hi_i |v_i gamma_i| (positive means coherent)."""
    _check_direction(report, v)
    return abs(pair(v, report.gamma_vec())) - error_budget(report, v, upper=True)


def span_match_feasible(
    report: LinearityReport,
    functionals: Sequence[SparseVec],
    indices: Sequence[int],
    eps_upper: bool = True,
    budget: int = 10_000,
) -> Tuple[bool, Optional[SparseVec]]:
    """Decide whether some combination of the functionals matches gamma.

    Constraints: |<e_i, phi> - gamma_i| <= eps_i |gamma_i| for every i in
    the given subset of the usable indices, phi ranging over the span of
    the functionals.  Returns (satisfiable, coefficient vector) where the
    coefficient vector assigns a rational weight to each functional
    (1-based).  Uses the upper eps bound by default, matching the sign
    analysis; pass eps_upper=False for the conservative direction.
    """
    idx = sorted(set(int(i) for i in indices))
    outside = [i for i in idx if i not in report.gamma]
    if outside:
        raise PreconditionError(f"indices outside the usable prefix: {outside}")
    eps = report.eps_hi if eps_upper else report.eps_lo
    system = LinearSystem(variables=tuple(range(1, len(functionals) + 1)))
    for i in idx:
        coeffs = SparseVec({t + 1: phi[i] for t, phi in enumerate(functionals)})
        bound = eps[i] * abs(report.gamma[i])
        system.add(coeffs, "<=", report.gamma[i] + bound)
        system.add(-coeffs, "<=", bound - report.gamma[i])
    ok, witness = feasible(system, budget=budget)
    if not ok:
        return False, None
    return True, SparseVec({t: c for t, c in witness.items() if c != 0})
