"""Command-line entry point.

Exit codes: 0 success, 1 a proved formula mismatched (or a conjecture met a
counterexample), 2 a size budget was exceeded, 3 invalid arguments.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from fractions import Fraction
from typing import Sequence

from .combinatorics import binom
from .mlq import DEFAULT_QUEUE_BUDGET, BudgetExceeded, Sector, stationary_from_queues
from .patterns import PatternQuery
from .tasep import DEFAULT_STATE_BUDGET, build_generator, simulate_many, solve_stationary

EXIT_OK, EXIT_MISMATCH, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3

DEFAULT_RANGES = {
    "ssyt": [8],
    "two-point": list(range(3, 8)),
    "distance": [4, 5, 6],
    "three-point": [5, 6],
    "decreasing": list(range(4, 8)),
    "aggregate-two": list(range(2, 8)),
    "aggregate-three": [5, 6, 7],
    "reverse-word": [2, 3, 4],
    "lumping": [2, 3, 4, 5],
    "symmetries": list(range(2, 8)),
}

LONG_RUN_N = 8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> list[int]:
    """Parse ``5``, ``3-7`` or ``3,4,6``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            elif part.strip():
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 5, 3-7 or 3,4, got {text!r}")
    return out


def _pattern(text: str) -> PatternQuery:
    """``3,1`` puts labels at positions 1, 2; ``1:3,4:1`` gives explicit positions."""
    try:
        if ":" in text:
            return PatternQuery.of(tuple(int(x) for x in item.split(":")) for item in text.split(","))
        return PatternQuery.prefix([int(x) for x in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad pattern {text!r}: {exc}")


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ------------------------------------------------------------------ commands


def _two_point_matrix(n: int, budget: int) -> str:
    from .correlations import observed

    scale = n * binom(n, 2)
    lines = [f"n*binom(n,2)*P(w1, w2) for n={n} (rows w1, columns w2)"]
    for a in range(1, n + 1):
        cells = []
        for b in range(1, n + 1):
            v = Fraction(0) if a == b else observed(n, PatternQuery.prefix((a, b)), budget) * scale
            cells.append(str(v) if v.denominator == 1 else _q(v))
        lines.append(" ".join(f"{c:>6}" for c in cells))
    return "\n".join(lines)


def cmd_verify(args) -> int:
    from .verification import verify_formula

    targets = list(DEFAULT_RANGES) if args.target == "all" else [args.target]
    reports = []
    for target in targets:
        ns = args.n or DEFAULT_RANGES[target]
        if target == "ssyt" and args.max is not None:
            ns = [args.max]
        options = {}
        if target == "decreasing" and args.r:
            options["r_values"] = args.r
        if target in ("lumping", "reverse-word") and args.max_ring is not None:
            options["max_N"] = args.max_ring
        reports.append(verify_formula(target, ns, args.budget, **options))
    if args.format == "json":
        text = "[" + ",\n".join(r.to_json() for r in reports) + "]"
    elif args.format == "csv":
        text = "".join(r.to_csv() for r in reports)
    else:
        text = "\n".join(r.to_table() for r in reports)
        if args.target == "two-point" and reports[0].verdict != "incomplete":
            for n in args.n or []:
                text += "\n" + _two_point_matrix(n, args.budget)
    _emit(args, text)
    if any(r.verdict == "fail" for r in reports):
        return EXIT_MISMATCH
    if any(r.verdict == "incomplete" for r in reports):
        return EXIT_BUDGET
    return EXIT_OK


def cmd_conjecture(args) -> int:
    from .verification import verify_conjecture

    if any(n >= LONG_RUN_N for n in args.n) and not args.long:
        raise UsageError(f"n >= {LONG_RUN_N} is a long run; pass --long to confirm")
    report = verify_conjecture(args.name, args.n, args.budget, r_max=args.r)
    text = {"json": report.to_json, "csv": report.to_csv, "table": report.to_table}[args.format]()
    _emit(args, text)
    if report.verdict == "fail":
        return EXIT_MISMATCH
    return EXIT_BUDGET if report.verdict == "incomplete" else EXIT_OK


def cmd_exact(args) -> int:
    sector = Sector(tuple(args.sector))
    if args.method == "solve":
        dist = solve_stationary(build_generator(sector, args.state_budget))
    else:
        dist = stationary_from_queues(sector, method=args.method, budget=args.budget)
    if args.format == "csv":
        text = dist.to_csv()
    elif args.format == "json":
        text = dist.to_json()
    else:
        text = "\n".join(f"{' '.join(map(str, w))}  {_q(p)}" for w, _, p in dist.rows())
    _emit(args, text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.sector and args.n:
        raise UsageError("give either --sector or --n")
    sector = Sector(tuple(args.sector)) if args.sector else Sector.distinct(args.n or 0)
    patterns = args.pattern or [PatternQuery.prefix((2, 1))]
    seeds = list(range(args.seed, args.seed + args.seeds))
    runs = simulate_many(
        sector, args.horizon, args.burn_in, seeds, patterns, args.batches, not args.no_rotate, args.workers or 1
    )
    if args.format == "json":
        text = "[" + ",\n".join(r.to_json() for r in runs) + "]" if len(runs) > 1 else runs[0].to_json()
    else:
        sep = "," if args.format == "csv" else "  "
        lines = [sep.join(["seed", "pattern", "estimate", "se", "events"])]
        for r in runs:
            for p, e, s in zip(r.patterns, r.estimates, r.standard_errors):
                lines.append(sep.join([str(r.seed), p, repr(e), repr(s), str(r.events)]))
            lines.append(sep.join([str(r.seed), "cyclic descent", repr(r.descent_estimate), repr(r.descent_se), str(r.events)]))
        text = "\n".join(lines)
    _emit(args, text)
    return EXIT_OK


def cmd_ncore(args) -> int:
    from .limits import Abacus, LimitCurve, is_n_core, points_csv, random_growth, shape_distance, staircase

    n = args.n
    if args.curve:
        verts = LimitCurve(n).vertices()
        if args.format == "json":
            text = json.dumps({"n": n, "vertices": verts.tolist(), "area": LimitCurve(n).area()})
        else:
            text = points_csv(verts)
        _emit(args, text)
        return EXIT_OK
    if args.replay is not None:
        ab = Abacus(n)
        ab.run(args.replay)
        core = ab.partition()
        summary = {
            "n": n,
            "residues": args.replay,
            "partition": list(core.rows),
            "boxes": core.size,
            "is_core": is_n_core(core, n),
        }
        if core.size:
            summary["distance"] = shape_distance(core, n)
        if args.format == "csv":
            text = points_csv(staircase(core)) if core.size else "x,y\n"
        else:
            text = json.dumps(summary)
        _emit(args, text)
        return EXIT_OK
    if args.steps is None:
        raise UsageError("ncore needs --curve, --replay or --steps")
    if args.seed is None:
        raise UsageError("ncore --steps needs --seed")
    rows = []
    last = None
    for seed in range(args.seed, args.seed + args.seeds):
        ab = random_growth(n, args.steps, seed)
        core = ab.partition()
        dist = shape_distance(core, n) if core.size else float("nan")
        rows.append({"n": n, "steps": args.steps, "seed": seed, "boxes": core.size, "distance": dist})
        last = core
    if args.format == "csv":
        # the boundary of the last run, for plotting
        text = points_csv(staircase(last)) if last is not None and last.size else "x,y\n"
    else:
        dists = [r["distance"] for r in rows]
        text = json.dumps({"runs": rows, "median_distance": statistics.median(dists)}, indent=1)
    _emit(args, text)
    return EXIT_OK


def cmd_psi(args) -> int:
    from .limits import collinearity, psi_closed, psi_from_correlations

    if args.n < 2:
        raise UsageError("psi needs n >= 2")
    closed = psi_closed(args.n)
    corr = psi_from_correlations(args.n, args.source)
    ratio = collinearity(corr, closed)
    ok = ratio is not None and ratio > 0
    data = {
        "n": args.n,
        "closed": [_q(c) for c in closed.components],
        "from_correlations": [_q(c) for c in corr.components],
        "unit": list(closed.unit),
        "ratio": _q(ratio) if ratio is not None else None,
        "collinear": ok,
    }
    if args.format == "json":
        text = json.dumps(data, indent=1)
    elif args.format == "csv":
        text = "k,closed,from_correlations,unit\n" + "".join(
            f"{k + 1},{a},{b},{u!r}\n" for k, (a, b, u) in enumerate(zip(data["closed"], data["from_correlations"], data["unit"]))
        )
    else:
        text = "\n".join(f"{k}: {v}" for k, v in data.items())
    _emit(args, text)
    return EXIT_OK if ok else EXIT_MISMATCH


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    from .verification import CONJECTURES, FORMULAS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default="table")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--budget", type=int, default=DEFAULT_QUEUE_BUDGET, help="queue enumeration budget")
    common.add_argument("--state-budget", type=int, default=DEFAULT_STATE_BUDGET, help="generator state budget")
    common.add_argument("--workers", type=int, help="worker processes (default: MTASEP_WORKERS or CPU count)")

    p = _Parser(prog="mtasep", description="Exact and simulated correlations of the multispecies TASEP on a ring.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="check proved formulas against exact laws")
    v.add_argument("target", choices=sorted(FORMULAS) + ["all"])
    v.add_argument("--n", type=_ints, help="values of n, e.g. 5 or 3-7")
    v.add_argument("--max", type=int, help="largest entry for the tableau checks")
    v.add_argument("--r", type=_ints, help="tuple lengths for the decreasing check")
    v.add_argument("--max-ring", type=int, help="largest ring for lumping and reverse-word")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("conjecture", parents=[common], help="search for counterexamples")
    c.add_argument("name", choices=sorted(CONJECTURES))
    c.add_argument("--n", type=_ints, required=True)
    c.add_argument("--r", type=int, help="largest block length")
    c.add_argument("--long", action="store_true", help=f"allow n >= {LONG_RUN_N}")
    c.set_defaults(func=cmd_conjecture)

    e = sub.add_parser("exact", parents=[common], help="exact stationary law of a sector")
    e.add_argument("--sector", type=_ints, required=True, help="species counts, e.g. 2,1,2")
    e.add_argument("--method", choices=("transfer", "enumerate", "solve"), default="transfer")
    e.set_defaults(func=cmd_exact)

    s = sub.add_parser("simulate", parents=[common], help="continuous-time Monte Carlo")
    s.add_argument("--sector", type=_ints)
    s.add_argument("--n", type=int, help="distinct species on n sites")
    s.add_argument("--horizon", type=float, required=True)
    s.add_argument("--burn-in", type=float, default=0.0)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    s.add_argument("--pattern", type=_pattern, action="append", help="3,1 or 1:3,4:1 (repeatable)")
    s.add_argument("--batches", type=int, default=100)
    s.add_argument("--no-rotate", action="store_true")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("ncore", parents=[common], help="random n-core growth and its limit curve")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--curve", action="store_true", help="emit the vertices of the limit curve")
    g.add_argument("--replay", type=_ints, help="comma-separated residues to apply from the empty core")
    g.add_argument("--steps", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--seeds", type=int, default=1)
    g.set_defaults(func=cmd_ncore)

    q = sub.add_parser("psi", parents=[common], help="walk direction from correlations")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--source", choices=("formula", "enumeration"), default="formula")
    q.set_defaults(func=cmd_psi)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers:
        os.environ["MTASEP_WORKERS"] = str(args.workers)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ValueError) as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
