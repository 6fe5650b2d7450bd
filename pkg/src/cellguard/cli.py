"""Command-line front end.

    cellguard audit book.xlsx --format csv
    cellguard graph book.json -o book.dot
    cellguard heatmap book.xlsx --sheet Summary -o summary.html
    cellguard inject book.json --mix cat1=2,cat7=1 --seed 7 --out mutated.json --plan plan.json
    cellguard evaluate --plan plan.json --findings findings.json --baseline pristine.json

Exit status: 0 on success, 1 when --strict and the analysis raised
warnings, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import __version__
from .experiment import (
    InjectionPlan,
    InsufficientTargets,
    apply_injection,
    evaluate_detectors,
    parse_mix,
    plan_injection,
)
from .graph import aggregate_sheet_graph
from .reporting import ReportBundle, emit_findings, emit_heatmap, emit_workbook_graph, make_meta, parse_findings
from .risk import Analysis, AnalyzerConfig, run_all, sheet_colors
from .structure import find_consistent_ranges
from .values import COMMA, POINT
from .workbook import load_workbook, save_interchange

EXIT_OK, EXIT_WARNINGS, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """Bad input file or flag value; reported on stderr with exit code 2."""


def _load(args):
    try:
        return load_workbook(args.file, COMMA if args.locale == "comma" else POINT)
    except FileNotFoundError:
        raise InputError(f"no such file: {args.file}") from None
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read {args.file}: {e}") from None


def _config(path) -> AnalyzerConfig:
    if path is None:
        return AnalyzerConfig()
    try:
        return AnalyzerConfig.from_file(path)
    except FileNotFoundError:
        raise InputError(f"no such config file: {path}") from None
    except (OSError, ValueError, TypeError) as e:
        raise InputError(f"bad config {path}: {e}") from None


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from None


def _heatmap(wb, sheet, findings) -> str:
    return emit_heatmap(sheet, ranges=find_consistent_ranges(sheet), findings=findings)


def cmd_audit(args) -> int:
    wb = _load(args)
    cfg = _config(args.config)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs < 1:
        raise InputError("--jobs must be at least 1")
    ctx = Analysis(wb, cfg)
    findings = run_all(wb, cfg, jobs=jobs, analysis=ctx)
    doc = emit_findings(findings, args.format)
    sys.stdout.write(doc)
    if args.out:
        graph = emit_workbook_graph(aggregate_sheet_graph(ctx.graph, wb), sheet_colors(wb, findings, cfg),
                                    name=wb.name or "workbook")
        heatmaps = {s.name: _heatmap(wb, s, findings) for s in wb.sheets}
        meta = make_meta(cfg, Path(args.file).name, timestamp=not args.no_timestamp)
        meta["findings"] = len(findings)
        meta["warnings"] = list(ctx.warnings)
        try:
            ReportBundle(doc, graph, heatmaps, meta, args.format).write(args.out)
        except OSError as e:
            raise InputError(f"cannot write bundle to {args.out}: {e}") from None
    for w in ctx.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_WARNINGS if args.strict and ctx.warnings else EXIT_OK


def cmd_graph(args) -> int:
    wb = _load(args)
    cfg = _config(args.config)
    ctx = Analysis(wb, cfg)
    findings = run_all(wb, cfg, analysis=ctx)
    dot = emit_workbook_graph(aggregate_sheet_graph(ctx.graph, wb), sheet_colors(wb, findings, cfg),
                              legacy_arrow_colors=args.legacy_arrow_colors, name=wb.name or "workbook")
    _write(args.output, dot)
    return EXIT_OK


def cmd_heatmap(args) -> int:
    wb = _load(args)
    cfg = _config(args.config)
    sheets = []
    for name in args.sheet:
        s = wb.sheet(name)
        if s is None:
            raise InputError(f"no sheet named {name!r}; sheets are {[x.name for x in wb.sheets]}")
        sheets.append(s)
    findings = run_all(wb, cfg)
    if len(sheets) == 1:
        _write(args.output, _heatmap(wb, sheets[0], findings))
        return EXIT_OK
    if not args.output:
        raise InputError("several --sheet values need -o <directory>")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    from .reporting.bundle import safe_name
    for s in sheets:
        _write(out / f"{safe_name(s.name)}.html", _heatmap(wb, s, findings))
    return EXIT_OK


def cmd_inject(args) -> int:
    wb = _load(args)
    try:
        mix = parse_mix(args.mix)
    except ValueError as e:
        raise InputError(str(e)) from None
    try:
        plan = plan_injection(wb, mix, args.seed)
    except InsufficientTargets as e:
        raise InputError(str(e)) from None
    mutated = apply_injection(wb, plan)
    _write(args.out, save_interchange(mutated))
    _write(args.plan, plan.to_json())
    print(f"injected {len(plan.entries)} error(s)", file=sys.stderr)
    return EXIT_OK


def _findings_file(path):
    try:
        return parse_findings(_read_text(path))
    except (ValueError, KeyError) as e:
        raise InputError(f"bad findings file {path}: {e}") from None


def cmd_evaluate(args) -> int:
    start = time.perf_counter()
    try:
        plan = InjectionPlan.from_json(_read_text(args.plan))
    except (ValueError, KeyError) as e:
        raise InputError(f"bad plan file {args.plan}: {e}") from None
    findings = _findings_file(args.findings)
    baseline = _findings_file(args.baseline) if args.baseline else None
    report = evaluate_detectors(findings, plan, baseline)
    report = type(report)(report.per_category, report.true_pos, report.false_pos, report.false_neg,
                          time.perf_counter() - start)
    sys.stdout.write(report.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cellguard", description="Static risk audit for spreadsheets.")
    p.add_argument("--version", action="version", version=f"cellguard {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def workbook_cmd(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("file", help="workbook (.xlsx or interchange .json)")
        sp.add_argument("--locale", choices=["point", "comma"], default="point",
                        help="decimal separator used in interchange formulas (default: point)")
        return sp

    a = workbook_cmd("audit", "run every detector and print the findings")
    a.add_argument("--format", choices=["json", "csv", "html"], default="json")
    a.add_argument("--config", help="JSON or TOML analyzer settings")
    a.add_argument("--out", help="also write a report bundle into this directory")
    a.add_argument("--strict", action="store_true", help="exit 1 when the analysis produced warnings")
    a.add_argument("--no-timestamp", action="store_true", help="pin the bundle timestamp")
    a.add_argument("--jobs", type=int, help="detector threads (default: CPU count)")
    a.set_defaults(func=cmd_audit)

    g = workbook_cmd("graph", "sheet dependency graph as Graphviz DOT")
    g.add_argument("-o", "--output", help="output file (default: stdout)")
    g.add_argument("--config", help="JSON or TOML analyzer settings")
    g.add_argument("--legacy-arrow-colors", action="store_true",
                   help="colour arrows grey (rightward in tab order) or purple")
    g.set_defaults(func=cmd_graph)

    h = workbook_cmd("heatmap", "HTML grid of one or more sheets")
    h.add_argument("--sheet", action="append", required=True, help="sheet name; repeatable")
    h.add_argument("-o", "--output", help="output file, or directory for several sheets")
    h.add_argument("--config", help="JSON or TOML analyzer settings")
    h.set_defaults(func=cmd_heatmap)

    i = workbook_cmd("inject", "plant seeded errors and write the mutated workbook")
    i.add_argument("--mix", required=True, help="cat<k>=<n>[,...], k in 1..7")
    i.add_argument("--seed", type=int, required=True)
    i.add_argument("--out", required=True, help="mutated workbook (interchange JSON)")
    i.add_argument("--plan", required=True, help="plan file to write")
    i.set_defaults(func=cmd_inject)

    e = sub.add_parser("evaluate", help="score findings against an injection plan")
    e.add_argument("--plan", required=True)
    e.add_argument("--findings", required=True, help="JSON findings of the mutated workbook")
    e.add_argument("--baseline", help="JSON findings of the pristine workbook")
    e.set_defaults(func=cmd_evaluate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except InputError as e:
        print(f"cellguard: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
