"""Guided reconstruction of the rotated-functional sign apparatus.

For codimension n, the fan of angles r*pi/(2n+2) produces n+1 base points
x^(r) (cosine/sine coordinates against the first two functionals) and n+1
midpoint-angle functionals psi_s; the pairing <x^(r), psi_s> equals
sin(zeta_s - beta_r), so its sign is +1 exactly when s > r.  The
resulting sign rows (-1 repeated r times, then +1) are linearly
independent with determinant of magnitude 2^n, which is the hinge of the
non-proximinality argument.  Everything trigonometric is certified
interval arithmetic; everything else is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

from .approxlin import LinearityReport
from .errors import PrecisionBudgetError, PreconditionError
from .trig import RatInterval, base_angles, cos_enclosure, fan_angles, sin_enclosure
from .vectors import SparseVec, pair, sgn

DEFAULT_ANGLE_BITS = 44
SIGN_TABLE_BITS_CAP = 4096


@dataclass(frozen=True)
class TrigAngle:
    """An angle r*pi/(2n+2) as a certified interval."""

    r: int
    interval: RatInterval


def angle_ladder(n: int, bits: int = DEFAULT_ANGLE_BITS) -> List[TrigAngle]:
    """The base angles r*pi/(2n+2), r = 0..n+1, as certified intervals."""
    return [TrigAngle(r, iv) for r, iv in enumerate(base_angles(n, bits))]


@dataclass(frozen=True)
class SignMatrix:
    """Predicted sign rows: row r has r entries -1 followed by +1s."""

    n: int
    rows: Tuple[Tuple[int, ...], ...]

    @staticmethod
    def predicted(n: int) -> "SignMatrix":
        rows = tuple(tuple([-1] * r + [1] * (n + 1 - r)) for r in range(1, n + 2))
        return SignMatrix(n, rows)


def int_determinant(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    m = [list(map(int, row)) for row in rows]
    size = len(m)
    if any(len(row) != size for row in m):
        raise PreconditionError("determinant needs a square matrix")
    if size == 0:
        return 1
    sign = 1
    prev = 1
    for col in range(size - 1):
        pivot_row = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot_row is None:
            return 0
        if pivot_row != col:
            m[col], m[pivot_row] = m[pivot_row], m[col]
            sign = -sign
        for r in range(col + 1, size):
            for c in range(col + 1, size):
                m[r][c] = (m[r][c] * m[col][col] - m[r][col] * m[col][c]) // prev
            m[r][col] = 0
        prev = m[col][col]
    return sign * m[size - 1][size - 1]


def independence_check(matrix: SignMatrix) -> Tuple[bool, int]:
    """(linearly independent, exact determinant) for the sign rows."""
    det = int_determinant(matrix.rows)
    return det != 0, det


@dataclass(frozen=True)
class FanFunctional:
    """psi_s = sin(zeta_s) * phi1 - cos(zeta_s) * phi2, zeta_s the s-th
    midpoint angle of the codimension-n fan, coefficients certified."""

    n: int
    index: int  # s in 1..n+1
    bits: int
    sin_coeff: RatInterval
    cos_coeff: RatInterval
    phi1: SparseVec
    phi2: SparseVec

    @staticmethod
    def build(
        n: int, index: int, phi1: SparseVec, phi2: SparseVec, bits: int
    ) -> "FanFunctional":
        zeta = fan_angles(n, bits)[index - 1]
        return FanFunctional(
            n, index, bits, sin_enclosure(zeta, bits), cos_enclosure(zeta, bits), phi1, phi2
        )

    def at_bits(self, bits: int) -> "FanFunctional":
        return FanFunctional.build(self.n, self.index, self.phi1, self.phi2, bits)

    def pair_interval(self, x: SparseVec) -> RatInterval:
        p1, p2 = pair(x, self.phi1), pair(x, self.phi2)
        return self.sin_coeff.scale(p1) - self.cos_coeff.scale(p2)

    def coefficient_interval(self, i: int) -> RatInterval:
        return self.sin_coeff.scale(self.phi1[i]) - self.cos_coeff.scale(self.phi2[i])

    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.phi1.support()) | set(self.phi2.support())))


def build_fan(
    n: int, phi1: SparseVec, phi2: SparseVec, bits: int = DEFAULT_ANGLE_BITS
) -> List[FanFunctional]:
    """The n+1 midpoint-angle functionals with interval coefficients.

    All midpoint angles lie strictly inside (0, pi/2), so both
    coefficients are certified positive at any reasonable precision.
    """
    if n < 2:
        raise PreconditionError("the fan construction needs codimension >= 2")
    if phi1 == phi2:
        raise PreconditionError("the two anchor functionals must differ")
    return [FanFunctional.build(n, s, phi1, phi2, bits) for s in range(1, n + 2)]


def demo_points(n: int, bits: int = DEFAULT_ANGLE_BITS) -> List[SparseVec]:
    """Rational base points x^(r) = cos(beta_r) e1 + sin(beta_r) e2.

    Entries are rounded to within 2^-32 of the true trigonometric values;
    coset minimality is not (and cannot be) enforced at desk scale.
    """
    points = []
    for r, beta in enumerate(base_angles(n, bits)):
        if r == 0:
            continue
        c = cos_enclosure(beta, bits).midpoint().limit_denominator(1 << 34)
        s = sin_enclosure(beta, bits).midpoint().limit_denominator(1 << 34)
        points.append(SparseVec({1: c, 2: s}))
    return points


def certified_sign(
    x: SparseVec,
    f: Union[FanFunctional, SparseVec],
    bits: int = DEFAULT_ANGLE_BITS,
    bits_cap: int = SIGN_TABLE_BITS_CAP,
) -> int:
    """Certified sign of the pairing of x with an exact or fan functional.

    Exact probes give exact signs (sign of 0 is +1 by convention); fan
    functionals escalate interval precision until the sign is certified,
    raising PrecisionBudgetError at the cap.
    """
    if isinstance(f, SparseVec):
        return sgn(pair(x, f))
    p = bits
    fan = f if f.bits >= bits else f.at_bits(bits)
    while True:
        iv = fan.pair_interval(x)
        if not iv.straddles_zero():
            return iv.sign()
        if p >= bits_cap:
            raise PrecisionBudgetError(
                f"sign undetermined at {p} bits (point {x!r}, fan index {fan.index})"
            )
        p = min(2 * p, bits_cap)
        fan = fan.at_bits(p)


def sign_table(
    points: Sequence[SparseVec],
    functionals: Sequence[Union[FanFunctional, SparseVec]],
    bits: int = DEFAULT_ANGLE_BITS,
    bits_cap: int = SIGN_TABLE_BITS_CAP,
) -> List[List[int]]:
    """Certified sign of <x^(r), f_s> for every point/functional pair."""
    return [[certified_sign(x, f, bits, bits_cap) for f in functionals] for x in points]


def theta_values(
    report: LinearityReport, phi: SparseVec, indices: Sequence[int]
) -> Dict[int, Fraction]:
    """Tag-weight-scaled coordinates 2^(a_k^2) * phi_{a_k} on the prefix."""
    out: Dict[int, Fraction] = {}
    for i in indices:
        if i not in report.index_position:
            raise PreconditionError(f"index {i} is outside the report prefix")
        out[i] = phi[i] * (1 << i * i)
    return out


def theta_blocks(report: LinearityReport, phi: SparseVec) -> Dict[int, List[Fraction]]:
    """theta values of phi grouped by owning probe, usable indices only."""
    blocks: Dict[int, List[Fraction]] = {}
    for i in report.usable:
        blocks.setdefault(report.block[i], []).append(phi[i] * (1 << i * i))
    return blocks


# -- end-to-end walkthrough ---------------------------------------------------


def demo_probes(
    table, points: Sequence[SparseVec], fan: Sequence[FanFunctional], depth: int,
    max_denominator_bits: int = 16,
) -> List[SparseVec]:
    """Distinct stream-visible probes pairing nonzero with every point.

    Rational roundings of the fan coefficients are tried first, coarsening
    the denominator until the vectors occur within the stream prefix; the
    deterministic low-height pool tops up whatever is missing (collisions
    and zero pairings push towards the pool).
    """
    from .descent import probe_pool

    def admissible(z: SparseVec, chosen: List[SparseVec]) -> bool:
        return (
            not z.is_zero()
            and z not in chosen
            and all(pair(x, z) != 0 for x in points)
            and bool(table.occurrence_positions(z, depth))
        )

    n_probes = len(fan)
    chosen: List[SparseVec] = []
    for bits in range(max_denominator_bits, -1, -1):
        attempt: List[SparseVec] = []
        for f in fan:
            entries = {
                i: f.coefficient_interval(i).midpoint().limit_denominator(1 << bits)
                for i in f.support()
            }
            z = SparseVec(entries)
            if admissible(z, attempt):
                attempt.append(z)
        if len(attempt) == n_probes:
            return attempt
        if len(attempt) > len(chosen):
            chosen = attempt
    support = fan[0].support() if fan else (1, 2)
    for z in probe_pool(support):
        if len(chosen) >= n_probes:
            break
        if admissible(z, chosen):
            chosen.append(z)
    if len(chosen) < n_probes:
        raise PreconditionError(
            f"could not assemble {n_probes} demo probes within depth {depth}"
        )
    return chosen


_DISPLAY_GRAIN_BITS = 48


def _round_down(value: Fraction, bits: int = _DISPLAY_GRAIN_BITS) -> Fraction:
    return Fraction((value.numerator << bits) // value.denominator, 1 << bits)


def _round_up(value: Fraction, bits: int = _DISPLAY_GRAIN_BITS) -> Fraction:
    return Fraction(-((-value.numerator << bits) // value.denominator), 1 << bits)


def _interval_json(iv: RatInterval) -> Dict[str, str]:
    """Outward-rounded display form; still a valid enclosure."""
    from .vectors import format_rational

    return {
        "lo": format_rational(_round_down(iv.lo)),
        "hi": format_rational(_round_up(iv.hi)),
    }


def _abs_upper(iv: RatInterval) -> Fraction:
    return max(abs(iv.lo), abs(iv.hi))


def _abs_lower(iv: RatInterval) -> Fraction:
    if iv.straddles_zero():
        return Fraction(0)
    return min(abs(iv.lo), abs(iv.hi))


def run_demo(table, n: int, bits: int = DEFAULT_ANGLE_BITS, report_depth: int = 500) -> Dict:
    """Full sign-apparatus walkthrough at codimension n; JSON-ready output.

    Covers: certified angle ladder, base points, fan sign table against
    the predicted rows, exact probe sign table, rounding-quality
    accounting, row independence with exact determinant, and the
    tag-weight-scaled traces of the approximate derivative (constant per
    probe block, no tolerance involved).
    """
    from .approxlin import build_report
    from .vectors import format_rational

    phi1, phi2 = SparseVec.unit(1), SparseVec.unit(2)
    betas = angle_ladder(n, bits)
    fan = build_fan(n, phi1, phi2, bits)
    points = demo_points(n, bits)
    predicted = SignMatrix.predicted(n)
    psi_table = sign_table(points, fan, bits)
    independent, det = independence_check(predicted)

    probes = demo_probes(table, points, fan, report_depth)
    z_table = sign_table(points, probes)

    # Rounding quality: the sign transfer from the fan to the probes is
    # guaranteed when every l1 distance stays under half the smallest
    # certified pairing magnitude.
    threshold = min(
        _abs_lower(f.pair_interval(x)) for x in points for f in fan
    ) / 2
    distances = []
    for f, z in zip(fan, probes):
        dist = Fraction(0)
        for i in sorted(set(f.support()) | set(z.support())):
            dist += _abs_upper(f.coefficient_interval(i) - RatInterval.point(z[i]))
        distances.append(dist)
    sign_guarantee = all(d < threshold for d in distances)

    theta_section = []
    for r, x in enumerate(points, start=1):
        report = build_report(table, x, probes, report_depth)
        gvec = report.gamma_vec()
        blocks = theta_blocks(report, gvec)
        sigma_x = {j: sgn(pair(x, z)) for j, z in enumerate(probes)}
        expected = {j: Fraction(-s) for j, s in sigma_x.items()}
        constant = all(
            len(set(vals)) == 1 and vals[0] == expected[j]
            for j, vals in blocks.items()
        )
        theta_section.append(
            {
                "r": r,
                "sigma_x": {str(j): s for j, s in sorted(sigma_x.items())},
                "theta_blocks": {
                    str(j): [format_rational(v) for v in vals]
                    for j, vals in sorted(blocks.items())
                },
                "constant_per_block": constant,
            }
        )

    return {
        "n": n,
        "beta": [_interval_json(b.interval) for b in betas],
        "zeta": [
            {"sin": _interval_json(f.sin_coeff), "cos": _interval_json(f.cos_coeff)}
            for f in fan
        ],
        "points": [x.to_json() for x in points],
        "predicted_rows": [list(row) for row in predicted.rows],
        "psi_sign_table": psi_table,
        "psi_matches_prediction": psi_table == [list(r) for r in predicted.rows],
        "determinant": det,
        "independent": independent,
        "probes": [z.to_json() for z in probes],
        "z_sign_table": z_table,
        "z_matches_prediction": z_table == [list(r) for r in predicted.rows],
        "rounding": {
            "l1_distances": [format_rational(_round_up(d)) for d in distances],
            "half_min_pairing": format_rational(_round_down(threshold)),
            "sign_transfer_guaranteed": sign_guarantee,
        },
        "theta": theta_section,
    }
