"""Certified descent inside a coset of a finite-codimension subspace.

Given H as the joint kernel of finitely many independent, finitely
supported functionals and a point x outside H, the engine searches for a
direction v in H whose one-sided norm derivatives provably share a sign,
then line-searches a dyadic step h with a certified strict norm decrease.
Iterating yields a minimizing sequence that stays exactly in the coset
x + H; every emitted certificate can be re-derived from scratch.

The probe vectors feeding the linearity report are rational roundings of
the rotated-functional fan built from the first two defining functionals
(midpoint-angle sines/cosines), with the rounding denominator reduced
until every probe actually occurs in the reachable stream prefix; if the
fan cannot be made visible (or the codimension is 1), a deterministic
pool of low-height probes is used instead.  Any probe family with exact
nonzero pairings yields valid certificates; the fan choice merely follows
the sign-pattern mechanism that motivates the construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .approxlin import LinearityReport, build_report, coherence_margin
from .construction import ConstructionTable
from .errors import InputFormatError, PreconditionError, SearchBudgetError
from .gateaux import DerivativeEnclosure, dplus_norm_for_width
from .linalg import kernel_directions
from .norms import Enclosure, norm_enclosure_for_width
from .vectors import SparseVec, format_rational, pair, parse_rational, sup_norm


def _rank(functionals: Sequence[SparseVec]) -> int:
    support = sorted({i for phi in functionals for i in phi.support()})
    dim = len(kernel_directions(functionals, support))
    return len(support) - dim


class Subspace:
    """Joint kernel of linearly independent finitely supported functionals."""

    def __init__(self, functionals: Sequence[SparseVec]):
        funcs = tuple(functionals)
        if not funcs:
            raise PreconditionError("a subspace needs at least one functional")
        if any(phi.is_zero() for phi in funcs):
            raise PreconditionError("defining functionals must be nonzero")
        if _rank(funcs) != len(funcs):
            raise PreconditionError("defining functionals must be linearly independent")
        self.functionals = funcs

    @property
    def codimension(self) -> int:
        return len(self.functionals)

    def contains(self, v: SparseVec) -> bool:
        return all(pair(v, phi) == 0 for phi in self.functionals)

    def pairings(self, x: SparseVec) -> Tuple[Fraction, ...]:
        return tuple(pair(x, phi) for phi in self.functionals)

    def to_json(self) -> List[Dict[str, str]]:
        return [phi.to_json() for phi in self.functionals]

    @staticmethod
    def from_json(obj: object) -> "Subspace":
        if not isinstance(obj, list):
            raise InputFormatError("subspace must be a JSON array of functionals")
        return Subspace([SparseVec.from_json(phi) for phi in obj])


@dataclass(frozen=True)
class SearchParams:
    """Desk-scale search knobs (no mathematical content)."""

    report_depth: int = 500
    max_candidates: int = 200
    max_line_search: int = 200
    rounding_denominator_bits: int = 16
    sign_guard_bits: int = 4


@dataclass(frozen=True)
class SignEvidence:
    """Definite, matching one-sided derivative signs along a direction.

    ``step_cap`` bounds the line-search step so that every coordinate the
    direction touches stays strictly below both its owning probe's pairing
    magnitude and the sup norm of the base point; since probe supports are
    disjoint from tag supports, the pairings are invariant along the
    descent and the cap keeps every usable index usable forever.
    """

    d_plus: DerivativeEnclosure
    d_minus: DerivativeEnclosure
    margin: Fraction
    step_cap: Optional[Fraction] = None

    @property
    def shared_sign(self) -> int:
        return 1 if self.d_plus.lo > 0 else -1

    def __post_init__(self):
        if self.d_plus.sign_status == "straddles_zero":
            raise PreconditionError("d_plus enclosure does not determine a sign")
        if self.d_plus.sign_status != self.d_minus.sign_status:
            raise PreconditionError("one-sided derivative signs disagree")
        if self.step_cap is not None and self.step_cap <= 0:
            raise PreconditionError("step cap must be positive")


@dataclass(frozen=True)
class DescentCertificate:
    """Machine-checkable witness that x is not a nearest point in x + H."""

    x: SparseVec
    v: SparseVec
    h: Fraction
    norm_before: Enclosure
    norm_after: Enclosure
    d_plus: DerivativeEnclosure
    d_minus: DerivativeEnclosure

    def __post_init__(self):
        if not self.norm_after.hi < self.norm_before.lo:
            raise PreconditionError("certificate does not show a strict decrease")

    def next_point(self) -> SparseVec:
        return self.x + self.v.scale(self.h)

    def to_json(self) -> Dict[str, object]:
        return {
            "x": self.x.to_json(),
            "v": self.v.to_json(),
            "h": format_rational(self.h),
            "norm_before": self.norm_before.to_json(),
            "norm_after": self.norm_after.to_json(),
            "d_plus": self.d_plus.to_json(),
            "d_minus": self.d_minus.to_json(),
        }

    @staticmethod
    def from_json(obj: object) -> "DescentCertificate":
        if not isinstance(obj, dict):
            raise InputFormatError("certificate must be a JSON object")
        try:
            return DescentCertificate(
                x=SparseVec.from_json(obj["x"]),
                v=SparseVec.from_json(obj["v"]),
                h=parse_rational(obj["h"]),
                norm_before=Enclosure.from_json(obj["norm_before"]),
                norm_after=Enclosure.from_json(obj["norm_after"]),
                d_plus=DerivativeEnclosure.from_json(obj["d_plus"]),
                d_minus=DerivativeEnclosure.from_json(obj["d_minus"]),
            )
        except KeyError as exc:
            raise InputFormatError(f"certificate missing field {exc.args[0]!r}") from exc


def primitive(v: SparseVec) -> SparseVec:
    """Scale to coprime integer entries with positive leading entry."""
    if v.is_zero():
        return v
    lcm = 1
    for _, val in v.items():
        lcm = lcm * val.denominator // gcd(lcm, val.denominator)
    ints = [val * lcm for _, val in v.items()]
    g = 0
    for w in ints:
        g = gcd(g, abs(w.numerator))
    scale = Fraction(lcm, g)
    first = next(iter(v.items()))[1]
    if first < 0:
        scale = -scale
    return v.scale(scale)


# -- probe construction -----------------------------------------------------


def _fan_targets(n_probes: int) -> List[Tuple[Fraction, Fraction]]:
    """Rational approximations of (sin, cos) at the midpoint fan angles.

    Uses the interval sine/cosine from the trig module at 64 bits and
    takes midpoints; exactness is not needed here because probes are
    rounded much more coarsely anyway.
    """
    from .trig import fan_angles, cos_enclosure, sin_enclosure

    out = []
    for zeta in fan_angles(n_probes - 1, 64):
        s = sin_enclosure(zeta, 64)
        c = cos_enclosure(zeta, 64)
        out.append(((s.lo + s.hi) / 2, (c.lo + c.hi) / 2))
    return out


def _round_vector(values: Dict[int, Fraction], max_denominator: int) -> SparseVec:
    return SparseVec(
        {i: val.limit_denominator(max_denominator) for i, val in values.items()}
    )


def probe_pool(support: Sequence[int]) -> Iterator[SparseVec]:
    """Deterministic stream of low-height candidate probes."""
    grid = [Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2), Fraction(2), Fraction(-2)]
    base = [i for i in sorted(support) if i <= 3] or [1]
    singles = [SparseVec({i: g}) for i in base for g in grid]
    yield from singles
    for i, j in combinations(base + [m for m in (1, 2) if m not in base], 2):
        for gi in grid:
            for gj in grid:
                yield SparseVec({i: gi, j: gj})


def build_probes(
    table: ConstructionTable,
    subspace: Subspace,
    x: SparseVec,
    params: SearchParams = SearchParams(),
) -> List[SparseVec]:
    """Probe family for the linearity report at x: distinct, visible in the
    stream prefix, and pairing to exactly nonzero values with x.

    Tries the rotated-functional fan first, reducing the rounding
    denominator from the configured bound until the probes occur within
    the report depth; tops up from the deterministic pool if needed.
    """
    n = subspace.codimension + 1
    depth = params.report_depth
    s = sup_norm(x)

    def admissible(z: SparseVec, chosen: List[SparseVec]) -> bool:
        if z.is_zero() or z in chosen:
            return False
        p = pair(x, z)
        if p == 0:
            return False
        # demand a usable occurrence: a tag whose coordinate of x clears
        # both the domination and sup-activity thresholds
        return any(
            abs(x[table.tag(k)]) < min(abs(p), s)
            for k in table.occurrence_positions(z, depth)
        )

    chosen: List[SparseVec] = []
    if subspace.codimension >= 2:
        phi1, phi2 = subspace.functionals[0], subspace.functionals[1]
        targets = _fan_targets(n)
        for bits in range(params.rounding_denominator_bits, -1, -1):
            attempt: List[SparseVec] = []
            for s_mid, c_mid in targets:
                values: Dict[int, Fraction] = {}
                for i in sorted(set(phi1.support()) | set(phi2.support())):
                    values[i] = s_mid * phi1[i] - c_mid * phi2[i]
                z = _round_vector(values, 1 << bits)
                if admissible(z, attempt):
                    attempt.append(z)
            if len(attempt) > len(chosen):
                chosen = attempt  # keep the best partial fan; pool tops up
            if len(attempt) == n:
                break
    for z in probe_pool([i for phi in subspace.functionals for i in phi.support()]):
        if len(chosen) >= n:
            break
        if admissible(z, chosen):
            chosen.append(z)
    if len(chosen) < n:
        raise SearchBudgetError(
            f"could not assemble {n} admissible probes within depth {depth}"
        )
    return chosen


# -- direction search ---------------------------------------------------------


def _candidate_supports(usable: Sequence[int], size: int, cap: int) -> Iterator[Tuple[int, ...]]:
    """Subsets of the usable indices: increasing max index, then lex."""
    produced = 0
    idx = sorted(usable)
    for pos in range(size - 1, len(idx)):
        top = idx[pos]
        for rest in combinations(idx[:pos], size - 1):
            yield rest + (top,)
            produced += 1
            if produced >= cap:
                return


def find_descent_direction(
    table: ConstructionTable,
    subspace: Subspace,
    x: SparseVec,
    params: SearchParams = SearchParams(),
) -> Optional[Tuple[SparseVec, SignEvidence, LinearityReport]]:
    """Search for v in H with certified matching one-sided derivative signs.

    Enumerates kernel directions over small usable-index supports and
    keeps the candidate with the largest exact coherence margin; a
    positive margin is then certified by derivative enclosures refined
    below it.  Returns None when the budgeted search finds no positive
    margin -- never a disproof of existence.
    """
    if all(p == 0 for p in subspace.pairings(x)):
        raise PreconditionError("x lies in the subspace; the coset is trivial")
    probes = build_probes(table, subspace, x, params)
    report = build_report(table, x, probes, params.report_depth)
    size = subspace.codimension + 1
    if len(report.usable) < size:
        return None

    best: Optional[Tuple[Fraction, SparseVec]] = None
    for support in _candidate_supports(report.usable, size, params.max_candidates):
        for b in kernel_directions(subspace.functionals, support):
            v = primitive(b)
            margin = coherence_margin(report, v)
            if margin > 0 and (best is None or margin > best[0]):
                best = (margin, v)
    if best is None:
        return None
    margin, v = best

    # Usable indices satisfy |x_i| < |<x, z_j>| and |x_i| < sup_norm(x);
    # cap the step to keep both strict along the ray, so no tag is ever
    # excluded by later reports and descent can continue indefinitely.
    s = sup_norm(x)
    cap: Optional[Fraction] = None
    for i, vi in v.items():
        p = pair(x, report.probes[report.block[i]])
        room = min(abs(p), s) - abs(x[i])
        assert room > 0
        bound = room / (2 * abs(vi))
        cap = bound if cap is None or bound < cap else cap

    width = margin / (1 << params.sign_guard_bits)
    d_plus = dplus_norm_for_width(table, x, v, width)
    d_minus = dplus_norm_for_width(table, x, -v, width).reflected()
    if d_plus.sign_status == "straddles_zero" or d_plus.sign_status != d_minus.sign_status:
        return None  # defensive; the margin certifies this cannot happen
    return v, SignEvidence(d_plus, d_minus, margin, cap), report


def _floor_pow2(f: Fraction) -> Fraction:
    """Largest power of two <= f, for f > 0."""
    if f <= 0:
        raise ValueError("need a positive value")
    e = f.numerator.bit_length() - f.denominator.bit_length()
    p = Fraction(2) ** e
    if p > f:
        p /= 2
    return p


def certify_descent(
    table: ConstructionTable,
    subspace: Subspace,
    x: SparseVec,
    v: SparseVec,
    evidence: SignEvidence,
    params: SearchParams = SearchParams(),
) -> DescentCertificate:
    """Dyadic line search to a certified strict decrease along the ray.

    The step sign opposes the shared derivative sign; the step magnitude
    starts at 2^-4 times the norm scale over the direction's sup norm and
    halves until enclosures separate.  Enclosure widths track the
    predicted first-order decrease, so certification succeeds as soon as
    the step drops below the second-order kink scale.
    """
    if not subspace.contains(v):
        raise PreconditionError("direction is not exactly inside the subspace")
    s = evidence.shared_sign
    # Certified lower bound on the decrease rate in the descending sense.
    rate = evidence.d_minus.lo if s > 0 else -evidence.d_plus.hi
    assert rate > 0
    before_scale = norm_enclosure_for_width(table, x, Fraction(1, 256))
    start = before_scale.lo / (16 * max(Fraction(1), sup_norm(v)))
    if evidence.step_cap is not None:
        start = min(start, evidence.step_cap)
    t = _floor_pow2(start)
    for _ in range(params.max_line_search):
        h = -s * t
        y = x + v.scale(h)
        width = t * rate / 8
        ex = norm_enclosure_for_width(table, x, width)
        ey = norm_enclosure_for_width(table, y, width)
        if ey.hi < ex.lo:
            return DescentCertificate(
                x=x,
                v=v,
                h=h,
                norm_before=ex,
                norm_after=ey,
                d_plus=evidence.d_plus,
                d_minus=evidence.d_minus,
            )
        t /= 2
    raise SearchBudgetError("line search exhausted without a certified decrease")


@dataclass
class DescentChain:
    """A minimizing run: consecutive certificates sharing one coset."""

    subspace: Subspace
    x0: SparseVec
    certificates: List[DescentCertificate] = field(default_factory=list)

    def iterates(self) -> List[SparseVec]:
        pts = [self.x0]
        for cert in self.certificates:
            pts.append(cert.next_point())
        return pts

    def iterate_enclosures(self) -> List[Enclosure]:
        """One enclosure per iterate, strictly decreasing by construction.

        The enclosure of an interior iterate intersects the certificate
        that produced it with the one that consumed it; both enclose the
        same exact norm value, and the intersection makes the chain
        comparisons hi(t+1) < lo(t) inherit from the per-certificate
        guarantees.
        """
        certs = self.certificates
        if not certs:
            return []
        out = [certs[0].norm_before]
        for prev, nxt in zip(certs, certs[1:]):
            lo = max(prev.norm_after.lo, nxt.norm_before.lo)
            hi = min(prev.norm_after.hi, nxt.norm_before.hi)
            out.append(Enclosure(lo, hi, max(prev.norm_after.depth, nxt.norm_before.depth)))
        out.append(certs[-1].norm_after)
        return out

    def to_json(self) -> Dict[str, object]:
        return {
            "subspace": self.subspace.to_json(),
            "x0": self.x0.to_json(),
            "certificates": [c.to_json() for c in self.certificates],
        }

    @staticmethod
    def from_json(obj: object) -> "DescentChain":
        if not isinstance(obj, dict):
            raise InputFormatError("chain must be a JSON object")
        try:
            return DescentChain(
                subspace=Subspace.from_json(obj["subspace"]),
                x0=SparseVec.from_json(obj["x0"]),
                certificates=[DescentCertificate.from_json(c) for c in obj["certificates"]],
            )
        except KeyError as exc:
            raise InputFormatError(f"chain missing field {exc.args[0]!r}") from exc


def minimizing_sequence(
    table: ConstructionTable,
    subspace: Subspace,
    x0: SparseVec,
    steps: int,
    params: SearchParams = SearchParams(),
) -> DescentChain:
    """Iterate direction search and certified steps from x0.

    All iterates stay exactly in the coset x0 + H (rational arithmetic,
    directions in the kernel).  Stops early with the partial chain when
    the search budget trips.
    """
    if steps < 1:
        raise PreconditionError("steps must be >= 1")
    chain = DescentChain(subspace=subspace, x0=x0)
    x = x0
    for _ in range(steps):
        try:
            found = find_descent_direction(table, subspace, x, params)
            if found is None:
                break
            v, evidence, _report = found
            cert = certify_descent(table, subspace, x, v, evidence, params)
        except SearchBudgetError:
            break
        chain.certificates.append(cert)
        x = cert.next_point()
    return chain


# -- independent re-verification ----------------------------------------------


def verify_certificate(
    table: ConstructionTable, subspace: Subspace, cert: DescentCertificate
) -> List[str]:
    """Re-derive every certified quantity from scratch; list discrepancies.

    All enclosures are recomputed at the depths stored in the certificate
    and must match field-for-field (the pipeline is deterministic), the
    direction must lie exactly in the subspace, the derivative evidence
    must show matching definite signs, and the decrease must be strict.
    Returns an empty list when the certificate is genuine.
    """
    from .gateaux import dplus_enclosure_at_depth
    from .norms import enclosure_at_depth

    problems: List[str] = []
    if not subspace.contains(cert.v):
        problems.append("v is not in the subspace")
    if not cert.norm_after.hi < cert.norm_before.lo:
        problems.append("no strict decrease between the stored enclosures")
    before = enclosure_at_depth(table, cert.x, cert.norm_before.depth)
    if (before.lo, before.hi) != (cert.norm_before.lo, cert.norm_before.hi):
        problems.append("norm_before does not recompute")
    after = enclosure_at_depth(table, cert.next_point(), cert.norm_after.depth)
    if (after.lo, after.hi) != (cert.norm_after.lo, cert.norm_after.hi):
        problems.append("norm_after does not recompute")
    dp = dplus_enclosure_at_depth(table, cert.x, cert.v, cert.d_plus.depth)
    if (dp.lo, dp.hi) != (cert.d_plus.lo, cert.d_plus.hi):
        problems.append("d_plus does not recompute")
    dm = dplus_enclosure_at_depth(table, cert.x, -cert.v, cert.d_minus.depth).reflected()
    if (dm.lo, dm.hi) != (cert.d_minus.lo, cert.d_minus.hi):
        problems.append("d_minus does not recompute")
    if cert.d_plus.sign_status == "straddles_zero" or (
        cert.d_plus.sign_status != cert.d_minus.sign_status
    ):
        problems.append("derivative evidence does not determine a shared sign")
    return problems


def verify_chain(table: ConstructionTable, chain: DescentChain) -> List[str]:
    """Verify every certificate and the coset/chaining structure."""
    problems: List[str] = []
    base = chain.subspace.pairings(chain.x0)
    x = chain.x0
    for t, cert in enumerate(chain.certificates):
        if cert.x != x:
            problems.append(f"step {t}: base point does not chain")
        for msg in verify_certificate(table, chain.subspace, cert):
            problems.append(f"step {t}: {msg}")
        x = cert.next_point()
        if chain.subspace.pairings(x) != base:
            problems.append(f"step {t}: iterate left the coset")
    encs = chain.iterate_enclosures()
    for t in range(len(encs) - 1):
        if not encs[t + 1].hi < encs[t].lo:
            problems.append(f"step {t}: iterate enclosures fail the strict chain")
    return problems
