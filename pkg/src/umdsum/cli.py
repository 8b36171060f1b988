"""Command-line entry point: eval, search, optimize, verify, table."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation

from . import __version__
from .alpha import alpha
from .dyadic import InvalidPermutation, KappaInstance, Permutation
from .exact_search import SearchLimitError, branch_and_bound, exhaustive_search
from .local_search import OptimizerConfig, optimize
from .report import TABLE_ONE_IDENTITY, ratio_decimal
from .verify import SUITES, run_suites

SEED_ENV = "UMDSUM_SEED"
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_INCOMPLETE = 3


class UsageError(Exception):
    """Bad input that maps to exit code 2."""


def _count(text: str) -> int:
    """Positive integer, also accepting forms like 1e9."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value != value.to_integral_value() or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit_text(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(header))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


# ---------------------------------------------------------------- commands


def _load_permutation(args) -> Permutation:
    if args.identity:
        return Permutation.identity(args.n)
    try:
        with open(args.perm, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read permutation file: {exc}") from None
    try:
        return Permutation.from_text(text, args.n)
    except InvalidPermutation as exc:
        raise UsageError(f"invalid permutation: {exc}") from None


def cmd_eval(args) -> tuple[int, str, dict]:
    if args.n < 1:
        raise UsageError("n must be at least 1")
    perm = _load_permutation(args)
    inst = KappaInstance.for_level(args.n)
    res = alpha(inst, perm)
    value = res.value
    # the same functional with the full prefix h = 2^n - 1 left out of the maximum
    partial = alpha(inst, perm, include_full_prefix=False).value if args.verbose else None
    if args.format == "json":
        out = {"n": args.n, "value": value.to_json(), "fraction": str(value), "decimal": value.decimal()}
        if args.verbose:
            out["per_row"] = [str(v) for v in res.per_row]
            out["argmax_h"] = list(res.argmax_h)
            out["value_without_full_prefix"] = str(partial)
        text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    elif args.format == "csv":
        if args.verbose:
            rows = [[i, str(v), v.decimal(), h] for i, (v, h) in enumerate(zip(res.per_row, res.argmax_h))]
            text = _emit_csv(["row", "fraction", "decimal", "argmax_h"], rows)
            text += _emit_csv(
                ["n", "fraction", "decimal", "without_full_prefix"], [[args.n, str(value), value.decimal(), str(partial)]]
            )
        else:
            text = _emit_csv(["n", "fraction", "decimal"], [[args.n, str(value), value.decimal()]])
    else:
        text = f"alpha_{args.n} = {value} = {value.decimal()}\n"
        if args.verbose:
            rows = [[i, str(v), v.decimal(), h] for i, (v, h) in enumerate(zip(res.per_row, res.argmax_h))]
            text += _emit_text(["row", "sup", "decimal", "argmax_h"], rows)
            text += f"without the full prefix: {partial} = {partial.decimal()}\n"
    if inst.flagged:
        sys.stderr.write(f"note: n=1 value differs from the tabulated {TABLE_ONE_IDENTITY[1]}\n")
    return EXIT_OK, text, {"value": str(value)}


def cmd_search(args) -> tuple[int, str, dict]:
    try:
        if args.mode == "exhaustive":
            report = exhaustive_search(args.n, use_swap_symmetry=args.swap_symmetry)
        else:
            report = branch_and_bound(args.n, node_budget=args.budget, use_swap_symmetry=args.swap_symmetry)
    except SearchLimitError as exc:
        raise UsageError(str(exc)) from None
    code = EXIT_OK if report.complete else EXIT_INCOMPLETE
    return code, report.dumps() + "\n", {"best_value": str(report.best_value), "complete": report.complete}


def _optimizer_config(args, n: int) -> OptimizerConfig:
    try:
        return OptimizerConfig(
            n=n,
            restarts=args.restarts,
            seed=args.seed,
            max_passes=args.max_passes,
            block_levels=getattr(args, "block_levels", None),
            parallelism=args.threads,
            accept_ties=not getattr(args, "no_ties", False),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_optimize(args) -> tuple[int, str, dict]:
    cfg = _optimizer_config(args, args.n)
    report = optimize(KappaInstance.for_level(args.n), cfg)
    if args.verbose:
        sys.stderr.write(
            f"n={args.n} best={report.best_decimal} successes={report.extra['success_count']}/{cfg.restarts}"
            f" time={report.wall_time:.2f}s\n"
        )
    summary = {"best_value": str(report.best_value), "success_count": report.extra["success_count"]}
    return EXIT_OK, report.dumps() + "\n", summary


def cmd_verify(args) -> tuple[int, str, dict]:
    lines = []
    ok = True
    for report in run_suites(args.suite):
        lines.append(f"== {report.title}")
        lines.extend(report.lines())
        for r in report.results:
            for ce in r.counterexamples:
                lines.append(f"  counterexample ({r.name}): {ce!r}")
        ok &= report.passed
    lines.append("all checks passed" if ok else "some checks FAILED")
    return (EXIT_OK if ok else EXIT_FAILED), "\n".join(lines) + "\n", {"passed": ok}


TABLE_ONE_HEADER = ["n", "value", "value/sqrt(n)", "alpha_identity", "ratio", "method", "note"]
TABLE_TWO_HEADER = ["n", "value", "value/sqrt(n)", "alpha_identity", "ratio", "runs", "successful"]


def _ratio_sqrt(value, n: int) -> str:
    return f"{float(value) / math.sqrt(n):.4f}"


def table_one_rows(budget: int) -> tuple[list[list], bool]:
    rows = []
    complete = True
    for n in range(1, 5):
        report = exhaustive_search(n) if n <= 3 else branch_and_bound(n, node_budget=budget)
        notes = []
        if n == 1:
            notes.append(f"tabulated {TABLE_ONE_IDENTITY[1]}; convention mismatch")
        if not report.complete:
            complete = False
            notes.append("budget exhausted; lower bound")
        rows.append([
            n,
            report.best_decimal,
            _ratio_sqrt(report.best_value, n),
            report.identity_value.decimal(),
            ratio_decimal(report.best_value, report.identity_value),
            "exhaustive" if n <= 3 else "branch-and-bound",
            "; ".join(notes),
        ])
    return rows, complete


def table_two_rows(args) -> list[list]:
    rows = []
    for n in range(5, args.max_n + 1):
        report = optimize(KappaInstance.for_level(n), _optimizer_config(args, n))
        rows.append([
            n,
            report.best_decimal,
            _ratio_sqrt(report.best_value, n),
            report.identity_value.decimal(),
            ratio_decimal(report.best_value, report.identity_value),
            report.extra["restarts"],
            report.extra["success_count"],
        ])
    return rows


def cmd_table(args) -> tuple[int, str, dict]:
    if args.which == 1:
        rows, complete = table_one_rows(args.budget)
        header = TABLE_ONE_HEADER
        code = EXIT_OK if complete else EXIT_INCOMPLETE
    else:
        if args.max_n < 5:
            raise UsageError("--max-n must be at least 5")
        rows = table_two_rows(args)
        header = TABLE_TWO_HEADER
        code = EXIT_OK
    text = _emit_csv(header, rows) if args.format == "csv" else _emit_text(header, rows)
    return code, text, {"rows": len(rows)}


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="umdsum", description="Evaluate and search the kappa-matrix permutation functional.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the result here instead of standard output")
    common.add_argument("--manifest", help="write the run manifest here instead of standard error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate alpha for one permutation")
    p.add_argument("--n", type=int, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--identity", action="store_true")
    src.add_argument("--perm", metavar="FILE", help="one line of 2^n whitespace-separated 0-based images")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--verbose", "-v", action="store_true", help="include per-row suprema")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("search", parents=[common], help="proven maximum over all permutations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("exhaustive", "bnb"), default="exhaustive")
    p.add_argument("--budget", type=_count, default=10**9, help="node budget for bnb (e.g. 1e9)")
    p.add_argument("--no-swap-symmetry", dest="swap_symmetry", action="store_false")
    p.set_defaults(func=cmd_search, swap_symmetry=None)

    def add_optimizer_flags(p, restarts: int) -> None:
        p.add_argument("--restarts", type=_count, default=restarts)
        p.add_argument("--seed", type=int, default=_default_seed(), help=f"default from ${SEED_ENV}, else 0")
        p.add_argument("--threads", type=int, default=0, help="worker threads; 0 uses all cores, 1 runs sequentially")
        p.add_argument("--max-passes", type=_count, default=200)

    p = sub.add_parser("optimize", parents=[common], help="restarted local search")
    p.add_argument("--n", type=int, required=True)
    add_optimizer_flags(p, 100)
    p.add_argument("--block-levels", type=int, default=None, help="largest partner-block level (default n-1)")
    p.add_argument("--no-ties", action="store_true", help="reject equal-value moves")
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", parents=[common], help="reproduce the value tables")
    p.add_argument("--which", type=int, choices=(1, 2), required=True)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--budget", type=_count, default=10**10, help="branch-and-bound node budget for n=4")
    p.add_argument("--max-n", type=int, default=6)
    add_optimizer_flags(p, 500)
    p.set_defaults(func=cmd_table)
    return parser


def _manifest(args, argv: list[str], started: datetime, wall: float, code: int, summary: dict) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "manifest", "output", "command")}
    seeds = [args.seed] if hasattr(args, "seed") else []
    return {
        "command": args.command,
        "argv": argv,
        "parameters": params,
        "version": __version__,
        "seeds": seeds,
        "started": started.isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "wall_time": round(wall, 6),
        "outputs": [args.output or "stdout"],
        "exit_code": code,
        "summary": summary,
    }


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "swap_symmetry", False) is None:
        args.swap_symmetry = args.mode == "bnb"
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        code, text, summary = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        code, text, summary = EXIT_USAGE, "", {"error": str(exc)}
    if text:
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    manifest = _manifest(args, argv, started, time.perf_counter() - t0, code, summary)
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stderr.write(json.dumps(manifest, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
