"""Command-line interface: batch JSON in, deterministic JSON out.

Exit codes: 0 success, 1 hypothesis/precondition/input errors, 2 budget
exhaustion.  All rationals travel as strings, so outputs round-trip
losslessly and identical inputs produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import List, Optional

from .approxlin import (
    LinearityReport,
    build_report,
    span_match_feasible,
    verify_linearity_bound,
)
from .config import Config, load_config
from .construction import canonical_table
from .demo import run_demo
from .descent import DescentChain, SearchParams, Subspace, minimizing_sequence, verify_chain
from .errors import BudgetError, ProxinormError
from .gateaux import dminus_norm, dplus_norm
from .norms import norm_enclosure
from .vectors import SparseVec

def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ProxinormError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ProxinormError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}")


def _load_vec(path: str) -> SparseVec:
    return SparseVec.from_json(_load_json(path))


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=1) + "\n")


def _trial_directions(report: LinearityReport, count: int) -> List[SparseVec]:
    """Deterministic pseudo-random directions on the usable indices."""
    rng = random.Random(0)
    values = [1, -1, 2, -2, "1/2", "-1/2"]
    out = []
    usable = list(report.usable)
    for _ in range(count):
        if not usable:
            break
        size = rng.randint(1, min(3, len(usable)))
        picks = rng.sample(usable, size)
        out.append(SparseVec({i: values[rng.randrange(len(values))] for i in picks}))
    return out


def _cmd_construct(args, config: Config) -> int:
    table = canonical_table(config.depth_budget)
    for k, u, a in table.prefix(args.k_max):
        sys.stdout.write(json.dumps({"k": k, "u": u.to_json(), "a": a}) + "\n")
    return 0


def _cmd_norm(args, config: Config) -> int:
    table = canonical_table(config.depth_budget)
    enc = norm_enclosure(table, _load_vec(args.vec), args.bits or config.precision_bits)
    _emit(enc.to_json())
    return 0


def _cmd_deriv(args, config: Config) -> int:
    table = canonical_table(config.depth_budget)
    x, u = _load_vec(args.x), _load_vec(args.u)
    bits = args.bits or config.precision_bits
    enc = dminus_norm(table, x, u, bits) if args.minus else dplus_norm(table, x, u, bits)
    _emit(enc.to_json())
    return 0


def _cmd_approxlin(args, config: Config) -> int:
    table = canonical_table(config.depth_budget)
    x = _load_vec(args.x)
    probes = [_load_vec(p) for p in args.z]
    report = build_report(table, x, probes, args.prefix)
    for v in _trial_directions(report, args.trials):
        verify_linearity_bound(table, x, report, v, config.precision_bits)
    _emit(report.to_json())
    return 0


def _cmd_feasible(args, config: Config) -> int:
    report = LinearityReport.from_json(_load_json(args.report))
    functionals = [_load_vec(p) for p in args.phi]
    indices = (
        [int(i) for i in args.indices.split(",")] if args.indices else list(report.usable)
    )
    ok, coeffs = span_match_feasible(
        report, functionals, indices, budget=config.elimination_budget
    )
    _emit(
        {
            "satisfiable": ok,
            "witness": coeffs.to_json() if coeffs is not None else None,
        }
    )
    return 0


def _cmd_descend(args, config: Config) -> int:
    table = canonical_table(config.depth_budget)
    subspace = Subspace([_load_vec(p) for p in args.phi])
    x0 = _load_vec(args.x0)
    params = SearchParams(rounding_denominator_bits=config.rounding_denominator_bits)
    chain = minimizing_sequence(table, subspace, x0, args.steps, params)
    _emit(chain.to_json())
    return 0


def _cmd_verify(args, config: Config) -> int:
    chain = DescentChain.from_json(_load_json(args.cert))
    table = canonical_table(config.depth_budget)
    problems = verify_chain(table, chain)
    _emit({"valid": not problems, "problems": problems})
    return 0 if not problems else 1


def _cmd_demo(args, config: Config) -> int:
    table = canonical_table(config.depth_budget)
    _emit(run_demo(table, args.n or config.demo_n))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxinorm",
        description="Exact-arithmetic series renorming of c0: certified norms, "
        "derivatives, linearity reports, and descent certificates.",
    )
    parser.add_argument("--config", help="key = value config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="dump a stream prefix as JSON lines")
    p.add_argument("--k-max", type=int, required=True)
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("norm", help="certified norm enclosure of a vector")
    p.add_argument("--vec", required=True)
    p.add_argument("--bits", type=int)
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("deriv", help="one-sided derivative enclosure")
    p.add_argument("--x", required=True)
    p.add_argument("--u", required=True)
    p.add_argument("--minus", action="store_true", help="left derivative")
    p.add_argument("--bits", type=int)
    p.set_defaults(func=_cmd_deriv)

    p = sub.add_parser("approxlin", help="approximate-linearity report")
    p.add_argument("--x", required=True)
    p.add_argument("--z", action="append", required=True, help="probe file (repeatable)")
    p.add_argument("--prefix", type=int, required=True, help="stream depth")
    p.add_argument("--trials", type=int, default=0)
    p.set_defaults(func=_cmd_approxlin)

    p = sub.add_parser("feasible", help="span-match feasibility against a report")
    p.add_argument("--report", required=True)
    p.add_argument("--phi", action="append", required=True)
    p.add_argument("--indices", help="comma-separated subset of the usable indices")
    p.set_defaults(func=_cmd_feasible)

    p = sub.add_parser("descend", help="certified minimizing sequence")
    p.add_argument("--phi", action="append", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(func=_cmd_descend)

    p = sub.add_parser("verify", help="re-check a certificate chain from scratch")
    p.add_argument("--cert", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("demo", help="sign-apparatus walkthrough")
    p.add_argument("--n", type=int)
    p.set_defaults(func=_cmd_demo)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except BudgetError as exc:
        sys.stderr.write(f"budget exhausted: {exc}\n")
        return 2
    except ProxinormError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
