"""``mvrc-robust`` command line.

Exit codes: 0 robust or success, 1 not robust, 2 input or validation error,
3 internal invariant violation found by the fuzzer.
"""

from __future__ import annotations

import argparse
import csv
import io
import statistics
import sys
import time
from typing import Optional, Sequence

from . import benchmarks
from .dsl import load_workload, parse_workload_or_raise
from .model import AnalysisSettings, Granularity, Method, Workload
from .robustness import (
    DEFAULT_SUBSET_LIMIT,
    SubsetLimitExceeded,
    build_graph,
    check_robust,
    maximal_robust_subsets,
)
from .summary_graph import SummaryGraph
from .validate import ValidationError

EXIT_ROBUST = 0
EXIT_NOT_ROBUST = 1
EXIT_INPUT = 2
EXIT_INVARIANT = 3


class InputError(Exception):
    pass


# --- argument helpers ------------------------------------------------------

def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("workload", nargs="?", help="workload DSL file")
    p.add_argument("--bench", help="shipped benchmark: smallbank, tpcc, auction or auction_n(N)")
    p.add_argument("--programs", help="comma-separated program names or abbreviations to keep")


def _add_settings(p: argparse.ArgumentParser) -> None:
    p.add_argument("--granularity", choices=[g.value for g in Granularity], default="attr")
    p.add_argument("--fk", action=argparse.BooleanOptionalAction, default=True,
                   help="use foreign key annotations (default: on)")
    p.add_argument("--method", choices=[m.value for m in Method], default="type2")


def _settings(args) -> AnalysisSettings:
    return AnalysisSettings(Granularity(args.granularity), args.fk, Method(args.method))


def _load(args) -> tuple[Workload, dict[str, str]]:
    if (args.workload is None) == (args.bench is None):
        raise InputError("give either a workload file or --bench")
    if args.bench is not None:
        try:
            workload = benchmarks.load_benchmark(args.bench)
        except (KeyError, ValueError) as e:
            raise InputError(str(e).strip("'\"")) from None
        abbrev = benchmarks.abbreviations(args.bench)
    else:
        try:
            workload = load_workload(args.workload)
        except OSError as e:
            raise InputError(f"cannot read {args.workload}: {e.strerror}") from None
        abbrev = {}
    if getattr(args, "programs", None):
        reverse = {v: k for k, v in abbrev.items()}
        wanted = [reverse.get(n.strip(), n.strip()) for n in args.programs.split(",") if n.strip()]
        try:
            workload = workload.restrict(wanted)
        except KeyError as e:
            raise InputError(str(e.args[0])) from None
    return workload, abbrev


def _fmt_subset(subset: Sequence[str], abbrev: dict[str, str]) -> str:
    names = sorted(abbrev.get(n, n) for n in subset)
    return "{" + ", ".join(names) + "}"


# --- commands ------------------------------------------------------------

def cmd_check(args, out) -> int:
    workload, _ = _load(args)
    settings = _settings(args)
    verdict = check_robust(workload, settings)
    nodes, edges, cf = verdict.graph.stats()
    if verdict.robust:
        print("ROBUST", file=out)
    else:
        print("NOT ROBUST", file=out)
        print(verdict.witness.describe(), file=out)
    print(f"settings: {settings.label}, method {settings.method.value}; "
          f"summary graph: {nodes} nodes, {edges} edges, {cf} counterflow", file=out)
    return EXIT_ROBUST if verdict.robust else EXIT_NOT_ROBUST


def cmd_subsets(args, out) -> int:
    workload, abbrev = _load(args)
    settings = _settings(args)
    try:
        subsets = maximal_robust_subsets(workload, settings, limit=args.limit)
    except SubsetLimitExceeded as e:
        raise InputError(str(e)) from None
    for subset in subsets:
        print(_fmt_subset(subset, abbrev), file=out)
    return EXIT_ROBUST


def graph_to_dot(graph: SummaryGraph) -> str:
    """DOT text: one node per LTP, dashed edges are counterflow."""
    lines = ["digraph summary {"]
    for name in graph.nodes:
        lines.append(f'  "{name}";')
    for e in graph.edges:
        style = ", style=dashed" if e.counterflow else ""
        lines.append(f'  "{e.src_program}" -> "{e.dst_program}" [label="{e.src} -> {e.dst}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_graph(args, out) -> int:
    workload, _ = _load(args)
    graph = build_graph(workload, _settings(args))
    nodes, edges, cf = graph.stats()
    dot = graph_to_dot(graph)
    if args.dot == "-":
        out.write(dot)
    elif args.dot:
        try:
            with open(args.dot, "w", encoding="utf-8") as fh:
                fh.write(dot)
        except OSError as e:
            raise InputError(f"cannot write {args.dot}: {e.strerror}") from None
    if args.dot != "-":
        print(f"nodes {nodes} edges {edges} counterflow {cf}", file=out)
    return EXIT_ROBUST


def _parse_n_list(text: str) -> list[int]:
    ns: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                ns.extend(range(lo, hi + 1))
            else:
                ns.append(int(part))
        except ValueError:
            raise InputError(f"bad --n-list entry {part!r}") from None
    if any(n < 1 for n in ns):
        raise InputError("--n-list values must be at least 1")
    return ns


SCALE_HEADER = ("n", "mean_seconds", "nodes", "edges", "counterflow", "verdict")


def scale_rows(ns: Sequence[int], repeats: int, settings: AnalysisSettings = AnalysisSettings()):
    """One row per n: timing of the full check on Auction(n) plus graph size."""
    if repeats <= 0:
        return
    for n in ns:
        workload = benchmarks.build_auction_n(n)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            verdict = check_robust(workload, settings)
            times.append(time.perf_counter() - t0)
        nodes, edges, cf = verdict.graph.stats()
        yield (n, f"{statistics.fmean(times):.6f}", nodes, edges, cf, "ROBUST" if verdict.robust else "NOT ROBUST")


def cmd_scale(args, out) -> int:
    ns = _parse_n_list(args.n_list)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCALE_HEADER)
    all_robust = True
    for row in scale_rows(ns, args.repeats, _settings(args)):
        writer.writerow(row)
        all_robust &= row[-1] == "ROBUST"
        if args.csv and args.csv != "-":
            print(f"n={row[0]} {row[-1]} {row[1]}s", file=out)
    if args.csv and args.csv != "-":
        try:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as e:
            raise InputError(f"cannot write {args.csv}: {e.strerror}") from None
    else:
        out.write(buf.getvalue())
    return EXIT_ROBUST if all_robust else EXIT_NOT_ROBUST


def cmd_fuzz(args, out) -> int:
    from .oracle import fuzz

    workload, _ = _load(args)
    report = fuzz(
        workload, _settings(args), budget=args.budget, seed=args.seed,
        max_txns=args.max_txns, max_tuples=args.max_tuples,
    )
    print(report.summary(), file=out)
    if report.non_serializable and not report.robust:
        print(f"{report.non_serializable} non-serializable schedule(s): expected, the workload is not declared robust",
              file=out)
    for cx in report.counterexamples:
        print(f"counterexample [{cx.check}] seed={report.seed}: {cx.detail}\n  schedule: {cx.schedule}", file=out)
    if not report.ok:
        print(f"INVARIANT VIOLATION: {report.invariant_violations} schedule(s)", file=out)
        return EXIT_INVARIANT
    print("OK: no invariant violations", file=out)
    return EXIT_ROBUST


def cmd_sql2btp(args, out) -> int:
    from .sql import sql_to_dsl

    if (args.schema is None) == (args.bench is None):
        raise InputError("give either --schema FILE or --bench")
    if args.bench is not None:
        try:
            schema = benchmarks.load_benchmark(args.bench).schema
        except (KeyError, ValueError) as e:
            raise InputError(str(e).strip("'\"")) from None
    else:
        try:
            with open(args.schema, encoding="utf-8") as fh:
                schema = parse_workload_or_raise(fh.read(), args.schema).schema
        except OSError as e:
            raise InputError(f"cannot read {args.schema}: {e.strerror}") from None
    try:
        with open(args.sql, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {args.sql}: {e.strerror}") from None
    out.write(sql_to_dsl(text, schema, args.sql))
    return EXIT_ROBUST


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvrc-robust", description="Static robustness analysis against multi-version Read Committed.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide robustness of a workload")
    _add_input(p)
    _add_settings(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("subsets", help="list the maximal robust subsets")
    _add_input(p)
    _add_settings(p)
    p.add_argument("--limit", type=int, default=DEFAULT_SUBSET_LIMIT, help="refuse workloads with more programs")
    p.set_defaults(func=cmd_subsets)

    p = sub.add_parser("graph", help="summary graph statistics and DOT export")
    _add_input(p)
    _add_settings(p)
    p.add_argument("--dot", metavar="PATH", help="write DOT to PATH ('-' for standard output)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("scale", help="time the check on Auction(n)")
    _add_settings(p)
    p.add_argument("--n-list", default="1-10", help="e.g. '1,2,5' or '1-100'")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--csv", metavar="PATH", help="write CSV to PATH (default: standard output)")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("fuzz", help="cross-check the analysis against random MVRC schedules")
    _add_input(p)
    _add_settings(p)
    p.add_argument("--budget", type=int, default=1000, help="number of schedules")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-txns", type=int, default=4)
    p.add_argument("--max-tuples", type=int, default=3, help="tuples per relation")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("sql2btp", help="translate SQL programs to the workload DSL")
    p.add_argument("sql", help="SQL file")
    p.add_argument("--schema", help="DSL file whose schema block is used")
    p.add_argument("--bench", help="take the schema of a shipped benchmark")
    p.set_defaults(func=cmd_sql2btp)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ValidationError as e:
        for d in e.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_INPUT
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
