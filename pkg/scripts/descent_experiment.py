#!/usr/bin/env python3
"""Descent experiment: how fast do certified minimizing sequences move?

Runs several starting points against a finite-codimension subspace, prints
per-step directions, dyadic step sizes and certified norm drops, and
re-verifies every emitted chain.  Everything goes through the public API;
the output is deterministic.

Usage:
    python scripts/descent_experiment.py [--steps N] [--points P] [--codim C]
"""

import argparse
import random
import sys
from fractions import Fraction

from proxinorm.construction import canonical_table
from proxinorm.descent import Subspace, minimizing_sequence, verify_chain
from proxinorm.vectors import SparseVec


def pow2_str(value):
    """Exact order of magnitude of a positive rational, as '~2^e'."""
    if value <= 0:
        return "0"
    e = value.numerator.bit_length() - value.denominator.bit_length()
    return f"~2^{e}"


def random_start(rng, subspace):
    while True:
        entries = {}
        for i in rng.sample(range(1, 10), rng.randint(3, 5)):
            entries[i] = Fraction(rng.randint(1, 8) * rng.choice((1, -1)), rng.randint(1, 6))
        x0 = SparseVec(entries)
        if any(p != 0 for p in subspace.pairings(x0)):
            return x0


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=10)
    parser.add_argument("--points", type=int, default=3)
    parser.add_argument("--codim", type=int, default=2)
    args = parser.parse_args()

    table = canonical_table()
    subspace = Subspace([SparseVec.unit(i) for i in range(1, args.codim + 1)])
    rng = random.Random(0)

    for run in range(args.points):
        x0 = random_start(rng, subspace)
        print(f"run {run}: x0 = {x0.to_json()}")
        chain = minimizing_sequence(table, subspace, x0, args.steps)
        encs = chain.iterate_enclosures()
        for t, cert in enumerate(chain.certificates):
            exp = abs(cert.h).denominator.bit_length() - 1
            drop = encs[t].lo - cert.norm_after.hi
            print(
                f"  step {t:2d}: h = {'-' if cert.h < 0 else '+'}2^-{exp}"
                f" along {cert.v.to_json()}, certified drop {pow2_str(drop)}"
            )
        problems = verify_chain(table, chain)
        total = encs[0].hi - encs[-1].lo
        print(
            f"  {len(chain.certificates)} certified steps, total decrease {pow2_str(total)},"
            f" re-verification {'clean' if not problems else problems}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
