"""The ten risk detectors.

Each detector takes ``(wb, cfg, ctx=None)``; ``ctx`` is a shared
:class:`Analysis` so parsing and graph construction happen once per run.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from functools import cached_property

from ..addr import CellAddr, CellRange, ExternalAddr, RangeNode, node_key
from ..formula import extract_refs, metrics
from ..graph import (
    INFINITE_DEPTH,
    build_cell_graph,
    dependency_depths,
    empty_references,
    find_cycles,
    parse_formulas,
)
from ..structure import find_inconsistencies, maximal_rectangles, normal_forms
from ..values import ErrorCode, format_number, format_value, is_number
from ..workbook import Workbook
from .model import (
    EXTERNAL,
    INTERNAL,
    LITERAL_OVERWRITE,
    REFERENCE,
    AnalyzerConfig,
    DetectorKind,
    RiskDegree,
    RiskFinding,
)

# Values shared by more formula cells than this are too common to signal a copy.
COPY_MAX_SOURCES_PER_VALUE = 64


class Analysis:
    """Parsed formulas, graph, normal forms and depths for one workbook."""

    def __init__(self, wb: Workbook, cfg: AnalyzerConfig):
        self.wb = wb
        self.cfg = cfg
        self.asts, self.warnings = parse_formulas(wb)

    @cached_property
    def graph(self):
        return build_cell_graph(self.wb, self.cfg.expansion_cap, self.asts, self.warnings)

    @cached_property
    def forms(self) -> dict:
        return {s.name: normal_forms(s) for s in self.wb.sheets}

    @cached_property
    def depths(self):
        return dependency_depths(self.graph)

    @cached_property
    def metrics(self) -> dict:
        return {a: metrics(ast, a.sheet) for a, ast in self.asts.items()}

    def prepare(self) -> Analysis:
        """Compute everything up front so detectors can share it across threads."""
        self.graph, self.forms, self.depths, self.metrics  # noqa: B018
        return self

    def formula_text(self, addr: CellAddr) -> str:
        return self.wb.cell(addr).formula[1:]


def _ctx(wb, cfg, ctx) -> Analysis:
    return ctx if ctx is not None else Analysis(wb, cfg)


def _loc(*nodes) -> tuple:
    out = []
    for n in nodes:
        if isinstance(n, CellRange):
            out.append(n)
        elif isinstance(n, RangeNode):
            out.append(CellRange(*n))
        else:
            out.append(CellRange.single(n))
    return tuple(out)


def detect_fixed_numbers(wb, cfg, ctx=None) -> list[RiskFinding]:
    ctx = _ctx(wb, cfg, ctx)
    out = []
    degree = cfg.degree(DetectorKind.FIXED_NUMBERS, RiskDegree.LOW)
    for addr, m in ctx.metrics.items():
        flagged = []
        for x in m.numeric_literals:
            if x not in cfg.fixed_number_allowlist and x not in flagged:
                flagged.append(x)
        if not flagged:
            continue
        names = ", ".join(format_number(x) for x in flagged)
        suggestion = (f"Consider placing {names} in separate cell" if len(flagged) == 1
                      else f"Consider placing {names} in separate cells")
        out.append(RiskFinding(DetectorKind.FIXED_NUMBERS, degree, _loc(addr),
                               ctx.formula_text(addr), wb.value_at(addr), suggestion))
    return out


_ACTUAL_TEXT = {
    "different-formula": "Formula differs from",
    "literal-overwrite": "Fixed value overwrites",
    "blank-gap": "Empty cell interrupts",
}
_ACTUAL_SUGGESTION = {
    "different-formula": "Check this formula against the consistent formulas in {ctx}",
    "literal-overwrite": "Restore the formula used in {ctx}",
    "blank-gap": "Fill the gap in {ctx} with the consistent formula",
}


def detect_unusual_ranges(wb, cfg, ctx=None) -> list[RiskFinding]:
    ctx = _ctx(wb, cfg, ctx)
    out = []
    degree = cfg.degree(DetectorKind.UNUSUAL_RANGE, RiskDegree.MEDIUM)
    for sheet in wb.sheets:
        for inc in find_inconsistencies(sheet, min_run=cfg.min_run, forms=ctx.forms[sheet.name]):
            context = str(inc.context)
            details = f"{_ACTUAL_TEXT[inc.actual]} the consistent formulas in {context} ({inc.expected_normal_form})"
            subtype = LITERAL_OVERWRITE if inc.actual == "literal-overwrite" else REFERENCE
            out.append(RiskFinding(DetectorKind.UNUSUAL_RANGE, degree, _loc(inc.cell), details,
                                   wb.value_at(inc.cell), _ACTUAL_SUGGESTION[inc.actual].format(ctx=context),
                                   subtype))
    return out


def _jealous_target(wb, addr, ast, cfg) -> str | None:
    refs = extract_refs(ast, addr.sheet)
    if not refs:
        return None
    per_sheet = Counter(
        wb.canonical_sheet_name(s.sheet) for s in refs
        if s.book is None and wb.sheet(s.sheet) is not None
    )
    for sheet, n in sorted(per_sheet.items(), key=lambda kv: (-kv[1], wb.sheet_index(kv[0]))):
        if sheet.lower() == addr.sheet.lower():
            continue
        if n >= cfg.jealousy_min_refs and n / len(refs) > cfg.jealousy_fraction:
            return sheet
    return None


def _components(cells: set) -> list[list[tuple[int, int]]]:
    """4-connected components of ``(row, col)`` cells, each sorted, in order."""
    seen, out = set(), []
    for start in sorted(cells):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            r, c = stack.pop()
            comp.append((r, c))
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in cells and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        out.append(sorted(comp))
    return out


def _component_location(sheet: str, comp: list) -> tuple:
    rows = [r for r, _ in comp]
    cols = [c for _, c in comp]
    box = CellRange(sheet, min(rows), min(cols), max(rows), max(cols))
    if box.size == len(comp):
        return (box,)
    return tuple(CellRange(sheet, r, c, r, c) for r, c in comp)


def detect_jealousy(wb, cfg, ctx=None) -> list[RiskFinding]:
    """Formulas that mostly reference one other sheet.

    Jealous cells sharing a normal form form one group.  The group's first
    cell gets a finding with its formula; each connected run of two or more
    cells on a sheet gets one range finding.
    """
    ctx = _ctx(wb, cfg, ctx)
    degree = cfg.degree(DetectorKind.JEALOUSY, RiskDegree.MEDIUM)
    groups = defaultdict(list)  # normal form -> [(addr, target)]
    for addr, ast in ctx.asts.items():
        target = _jealous_target(wb, addr, ast, cfg)
        if target is not None:
            nf = ctx.forms[addr.sheet][(addr.row, addr.col)]
            groups[nf].append((addr, target))
    out = []
    for members in groups.values():
        members.sort(key=lambda m: (wb.sheet_index(m[0].sheet), m[0].row, m[0].col))
        leader, target = members[0]
        suggestion = f"Move this formula to {target}"
        out.append(RiskFinding(DetectorKind.JEALOUSY, degree, _loc(leader), ctx.formula_text(leader),
                               wb.value_at(leader), suggestion))
        per_sheet = defaultdict(set)
        targets = {}
        for addr, t in members:
            per_sheet[addr.sheet].add((addr.row, addr.col))
            targets[addr] = t
        for sheet in sorted(per_sheet, key=wb.sheet_index):
            for comp in _components(per_sheet[sheet]):
                cells = [CellAddr(sheet, r, c) for r, c in comp]
                if cells == [leader]:
                    continue
                details = "Same formula" if leader in cells else f"Same formula as {leader}"
                last = cells[-1]
                out.append(RiskFinding(DetectorKind.JEALOUSY, degree, _component_location(sheet, comp),
                                       details, wb.value_at(last), f"Move this formula to {targets[last]}"))
    return out


def detect_multi_function(wb, cfg, ctx=None) -> list[RiskFinding]:
    ctx = _ctx(wb, cfg, ctx)
    degree = cfg.degree(DetectorKind.MULTI_FUNCTION, RiskDegree.MEDIUM)
    out = []
    for addr, m in ctx.metrics.items():
        if m.function_count >= cfg.multi_function_threshold:
            out.append(RiskFinding(
                DetectorKind.MULTI_FUNCTION, degree, _loc(addr), ctx.formula_text(addr), wb.value_at(addr),
                f"Split this formula into intermediate steps; it calls {m.function_count} functions"))
    return out


def detect_many_ref_groups(wb, cfg, ctx=None) -> list[RiskFinding]:
    ctx = _ctx(wb, cfg, ctx)
    degree = cfg.degree(DetectorKind.MANY_REF_GROUPS, RiskDegree.HIGH)
    out = []
    for addr, m in ctx.metrics.items():
        if m.distinct_ref_groups >= cfg.many_ref_groups_threshold:
            out.append(RiskFinding(
                DetectorKind.MANY_REF_GROUPS, degree, _loc(addr), ctx.formula_text(addr), wb.value_at(addr),
                f"Reduce the {m.distinct_ref_groups} referenced cell groups by using intermediate cells"))
    return out


def detect_long_chain(wb, cfg, ctx=None) -> list[RiskFinding]:
    """One finding per chain end whose depth reaches the threshold."""
    ctx = _ctx(wb, cfg, ctx)
    degree = cfg.degree(DetectorKind.LONG_CHAIN, RiskDegree.MEDIUM)
    depths = ctx.depths
    g = ctx.graph
    out = []
    for node in g.sorted_nodes():
        d = depths.depth.get(node, 0)
        if d == INFINITE_DEPTH or d < cfg.long_chain_threshold or not isinstance(node, CellAddr):
            continue
        if any(depths.depth.get(w) != INFINITE_DEPTH for w in g.dependents.get(node, ())):
            continue  # the chain continues further down
        path = depths.longest_path(node)
        source = path[0]
        out.append(RiskFinding(
            DetectorKind.LONG_CHAIN, degree, _loc(source, node),
            f"Chain of {d} formula steps from {source} to {node}", wb.value_at(node),
            "Shorten the chain by referencing source values directly"))
    return out


def _value_key(v):
    if is_number(v):
        return ("n", round(float(v), 9) + 0.0)
    if isinstance(v, str):
        return ("s", v)
    return None


def detect_copy_paste(wb, cfg, ctx=None) -> list[RiskFinding]:
    """Literal blocks equal, cell for cell, to cached formula values elsewhere.

    Every literal cell is matched with formula cells holding the same value;
    matches sharing (sheets, row offset, column offset) form candidate blocks,
    and the largest filled rectangle of each connected block is reported when
    it has at least ``copy_block_min_cells`` cells.  A formula that reads the
    literal cell itself is not a copy source.
    """
    ctx = _ctx(wb, cfg, ctx)
    degree = cfg.degree(DetectorKind.COPY_PASTE, RiskDegree.MEDIUM)
    sources = defaultdict(list)
    for addr, cell in wb.formula_cells():
        key = _value_key(cell.value)
        if key is not None:
            sources[key].append(addr)
    matches = defaultdict(set)  # (literal sheet, source sheet, dr, dc) -> {(row, col)}
    for addr, cell in wb.iter_cells():
        if cell.is_formula:
            continue
        key = _value_key(cell.value)
        srcs = sources.get(key, ())
        if not srcs or len(srcs) > COPY_MAX_SOURCES_PER_VALUE:
            continue
        for s in srcs:
            if addr in ctx.graph.precedents.get(s, ()):
                continue  # the formula just reads this cell
            matches[(addr.sheet, s.sheet, s.row - addr.row, s.col - addr.col)].add((addr.row, addr.col))
    candidates = []
    for (lit_sheet, src_sheet, dr, dc), cells in matches.items():
        if len(cells) < cfg.copy_block_min_cells:
            continue
        for comp in _components(cells):
            if len(comp) < cfg.copy_block_min_cells:
                continue
            rects = maximal_rectangles(comp)
            best = max(rects, key=lambda r: ((r[2] - r[0] + 1) * (r[3] - r[1] + 1), -r[0], -r[1]))
            top, left, bottom, right = best
            area = (bottom - top + 1) * (right - left + 1)
            if area < cfg.copy_block_min_cells:
                continue
            block = CellRange(lit_sheet, top, left, bottom, right)
            source = CellRange(src_sheet, top + dr, left + dc, bottom + dr, right + dc)
            candidates.append((area, block, source))
    candidates.sort(key=lambda c: (-c[0], wb.sheet_index(c[1].sheet), c[1].top, c[1].left,
                                   wb.sheet_index(c[2].sheet), c[2].top, c[2].left))
    out, taken = [], []
    for area, block, source in candidates:
        if any(_overlaps(block, t) for t in taken):
            continue
        taken.append(block)
        first = CellAddr(block.sheet, block.top, block.left)
        out.append(RiskFinding(DetectorKind.COPY_PASTE, degree, (block,), str(source), wb.value_at(first),
                               "Use references to avoid copy-pasting"))
    return out


def _overlaps(a: CellRange, b: CellRange) -> bool:
    return (a.sheet.lower() == b.sheet.lower() and a.top <= b.bottom and b.top <= a.bottom
            and a.left <= b.right and b.left <= a.right)


def detect_empty_reference(wb, cfg, ctx=None) -> list[RiskFinding]:
    ctx = _ctx(wb, cfg, ctx)
    degree = cfg.degree(DetectorKind.EMPTY_REFERENCE, RiskDegree.LOW)
    out = []
    for cell, target in empty_references(wb, ctx.graph):
        if cell not in ctx.asts:
            continue
        subtype = EXTERNAL if isinstance(target, ExternalAddr) else INTERNAL
        out.append(RiskFinding(
            DetectorKind.EMPTY_REFERENCE, degree, _loc(cell), ctx.formula_text(cell), wb.value_at(cell),
            f"Remove reference to {target}; Add a value to {target}", subtype))
    return out


def detect_excel_errors(wb, cfg, ctx=None) -> list[RiskFinding]:
    ctx = _ctx(wb, cfg, ctx)
    out = []
    g = ctx.graph
    for addr, cell in wb.iter_cells():
        if not isinstance(cell.value, ErrorCode):
            continue
        referenced = bool(g.dependents.get(addr))
        degree = cfg.degree(DetectorKind.EXCEL_ERROR, RiskDegree.HIGH if referenced else RiskDegree.MEDIUM)
        suggestion = f"Resolve the {cell.value} error"
        if referenced:
            suggestion += " before it propagates into the formulas that use it"
        details = cell.formula[1:] if cell.is_formula else format_value(cell.value)
        out.append(RiskFinding(DetectorKind.EXCEL_ERROR, degree, _loc(addr), details, cell.value, suggestion))
    return out


def detect_circle_chain(wb, cfg, ctx=None) -> list[RiskFinding]:
    ctx = _ctx(wb, cfg, ctx)
    degree = cfg.degree(DetectorKind.CIRCLE_CHAIN, RiskDegree.HIGH)
    out = []
    for cycle in find_cycles(ctx.graph):
        members = sorted(cycle, key=node_key)
        details = "; ".join(f"{a} = {ctx.formula_text(a)}" for a in cycle)
        out.append(RiskFinding(DetectorKind.CIRCLE_CHAIN, degree, _loc(*members), details,
                               wb.value_at(members[0]), "Break the circular reference between these cells"))
    return out


DETECTORS = {
    DetectorKind.FIXED_NUMBERS: detect_fixed_numbers,
    DetectorKind.UNUSUAL_RANGE: detect_unusual_ranges,
    DetectorKind.JEALOUSY: detect_jealousy,
    DetectorKind.MULTI_FUNCTION: detect_multi_function,
    DetectorKind.MANY_REF_GROUPS: detect_many_ref_groups,
    DetectorKind.LONG_CHAIN: detect_long_chain,
    DetectorKind.COPY_PASTE: detect_copy_paste,
    DetectorKind.EMPTY_REFERENCE: detect_empty_reference,
    DetectorKind.EXCEL_ERROR: detect_excel_errors,
    DetectorKind.CIRCLE_CHAIN: detect_circle_chain,
}
