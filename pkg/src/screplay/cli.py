"""Command-line front end.

Commands:
  replay         replay trace files, write journal/coverage, set exit code
  generate       generate a trace from a simulation config
  validate-graph check bundled syscall graphs (or one by name)
  coverage       merge coverage reports and check the conjunct threshold

Exit codes: 0 success with an empty journal; 1 success with WARN/INFO
entries; 2 failure (CRIT divergence, graph defects, or WARN under
--strict); 3 usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine.coverage import CoverageMismatch, CoverageReport
from .engine.journal import Severity, serialize_journal
from .engine.replay import ReplayStatus, replay_trace
from .graphs.catalog import GRAPH_CATALOG
from .graphs.model import GraphError, to_dot
from .graphs.validate import validate_graph
from .simkernel.config import InvalidConfig, SimError, load_config
from .simkernel.generate import generate_trace
from .tracefile.format import parse_trace, serialize_trace
from .tracefile.model import TraceError

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_FAILURE = 2
EXIT_USAGE = 3


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _exit_code_for(results, strict: bool) -> int:
    code = EXIT_CLEAN
    for result in results:
        severities = [e.severity for e in result.journal]
        if result.status == ReplayStatus.FAILURE or Severity.CRIT in severities:
            return EXIT_FAILURE
        if strict and Severity.WARN in severities:
            code = max(code, EXIT_FAILURE)
        elif severities:
            code = max(code, EXIT_FINDINGS)
    return code


def cmd_replay(args) -> int:
    results = []
    journal_lines = []
    merged: CoverageReport | None = None
    for path in args.trace:
        try:
            with open(path, "rb") as fh:
                trace = parse_trace(fh.read())
            result = replay_trace(trace)
        except OSError as exc:
            return _fail(f"cannot read trace {path}: {exc.strerror}")
        except (TraceError, GraphError) as exc:
            return _fail(f"{path}: {exc}")
        results.append(result)
        print(f"{path}: {result.status}, {result.calls_processed} calls, "
              f"{len(result.journal)} journal entries")
        for entry in result.journal:
            print(f"  {entry.summary()}")
        journal_lines.append(serialize_journal(result.journal))
        if merged is None:
            merged = result.coverage
        else:
            merged.merge(result.coverage)

    if args.journal:
        with open(args.journal, "w", encoding="utf-8") as fh:
            fh.write("".join(journal_lines))
    if args.coverage and merged is not None:
        with open(args.coverage, "w", encoding="utf-8") as fh:
            fh.write(merged.dumps())
    if args.figures and merged is not None:
        from .report import render_coverage_figure, render_journal_figure

        os.makedirs(args.figures, exist_ok=True)
        render_coverage_figure(merged, os.path.join(args.figures, "coverage.png"))
        entries = [e for r in results for e in r.journal]
        render_journal_figure(entries, os.path.join(args.figures, "journal.png"))

    return _exit_code_for(results, args.strict)


def cmd_generate(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = load_config(fh.read())
    except OSError as exc:
        return _fail(f"cannot read config {args.config}: {exc.strerror}")
    except InvalidConfig as exc:
        return _fail(f"invalid config: {exc}")
    try:
        trace = generate_trace(config)
    except SimError as exc:
        return _fail(str(exc))
    text = serialize_trace(trace)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(trace.calls)} calls to {args.out}")
    return EXIT_CLEAN


def cmd_validate_graph(args) -> int:
    if args.name == "all":
        names = sorted(GRAPH_CATALOG)
    elif args.name in GRAPH_CATALOG:
        names = [args.name]
    else:
        return _fail(f"unknown graph {args.name!r}; have: {', '.join(sorted(GRAPH_CATALOG))}")

    defective = False
    for name in names:
        graph = GRAPH_CATALOG[name]
        defects = validate_graph(graph)
        status = "ok" if not defects else f"{len(defects)} defects"
        print(f"{name}: {len(graph.nodes)} nodes, {status}")
        for defect in defects:
            defective = True
            print(f"  {defect}")
        if args.dot:
            os.makedirs(args.dot, exist_ok=True)
            dot_path = os.path.join(args.dot, f"{name}.dot")
            with open(dot_path, "w", encoding="utf-8") as fh:
                fh.write(to_dot(graph))
            print(f"  dot written to {dot_path}")
    return EXIT_FAILURE if defective else EXIT_CLEAN


def cmd_coverage(args) -> int:
    if not args.reports:
        return _fail("no coverage reports given")
    merged: CoverageReport | None = None
    for path in args.reports:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                report = CoverageReport.from_json(json.load(fh))
        except OSError as exc:
            return _fail(f"cannot read coverage {path}: {exc.strerror}")
        except (json.JSONDecodeError, KeyError) as exc:
            return _fail(f"{path}: not a coverage report ({exc})")
        if merged is None:
            merged = report
        else:
            try:
                merged.merge(report)
            except CoverageMismatch as exc:
                return _fail(f"{path}: {exc}")

    both, total = merged.conjuncts_covered()
    print(f"guard conjuncts observed both ways: {both}/{total} "
          f"({merged.conjunct_fraction():.3f}, threshold {args.threshold})")
    for g, fraction in sorted(merged.graph_fractions().items()):
        print(f"  {g}: nodes {fraction:.2f}")
    print(f"invariants exercised: {merged.invariant_fraction():.3f}")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(merged.dumps())
    if args.figures:
        from .report import render_coverage_figure

        os.makedirs(args.figures, exist_ok=True)
        render_coverage_figure(merged, os.path.join(args.figures, "coverage.png"), args.threshold)

    return EXIT_CLEAN if merged.conjunct_fraction() >= args.threshold else EXIT_FINDINGS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="screplay",
        description="Replay syscall traces against the access-control model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="replay trace files against the model")
    p.add_argument("trace", nargs="+", help="trace file(s), line-delimited JSON")
    p.add_argument("--journal", metavar="PATH", help="write journal entries (one JSON per line)")
    p.add_argument("--coverage", metavar="PATH", help="write merged coverage report JSON")
    p.add_argument("--figures", metavar="DIR", help="render coverage/journal figures into DIR")
    p.add_argument("--strict", action="store_true", help="treat WARN entries as failure (exit 2)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("generate", help="generate a trace from a simulation config")
    p.add_argument("config", help="simulation config (JSON)")
    p.add_argument("-o", "--out", required=True, help="output trace path, or - for stdout")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate-graph", help="validate bundled syscall graphs")
    p.add_argument("name", help="graph name or 'all'")
    p.add_argument("--dot", metavar="DIR", help="export graphs as DOT files into DIR")
    p.set_defaults(func=cmd_validate_graph)

    p = sub.add_parser("coverage", help="merge and check coverage reports")
    p.add_argument("reports", nargs="*", help="coverage report JSON files")
    p.add_argument("-o", "--out", metavar="PATH", help="write the merged report")
    p.add_argument("--figures", metavar="DIR", help="render coverage figure into DIR")
    p.add_argument("--threshold", type=float, default=0.8, help="conjunct coverage threshold")
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
