"""Cell dependency graphs, sheet-level aggregation, cycles and chain depth.

Edges run precedent -> dependent, so data flows along them.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field

from .addr import CellAddr, ExternalAddr, RangeNode, node_key
from .formula import FormulaSyntaxError, extract_refs, parse
from .formula.ast import RefSpan
from .workbook import Visibility, Workbook

DEFAULT_EXPANSION_CAP = 10_000
INFINITE_DEPTH = math.inf


def parse_formulas(wb: Workbook) -> tuple[dict, list[str]]:
    """``({CellAddr: ast}, warnings)``; unparseable formulas become warnings."""
    asts, warnings = {}, []
    for addr, cell in wb.formula_cells():
        try:
            asts[addr] = parse(cell.formula)
        except FormulaSyntaxError as exc:
            warnings.append(f"{addr}: skipped unparseable formula {cell.formula!r} ({exc})")
    return asts, warnings


def span_targets(span: RefSpan, home: str, wb: Workbook, cap: int = DEFAULT_EXPANSION_CAP) -> list:
    """Graph nodes a reference points at: member cells, or one RangeNode above ``cap``."""
    sheet = span.sheet or home
    if span.book is None:
        sheet = wb.canonical_sheet_name(sheet)
    top, left, bottom, right = span.bounds
    if span.size > cap:
        return [RangeNode(sheet, top, left, bottom, right, span.book)]
    if span.book is not None:
        return [ExternalAddr(span.book, sheet, r, c)
                for r in range(top, bottom + 1) for c in range(left, right + 1)]
    return [CellAddr(sheet, r, c) for r in range(top, bottom + 1) for c in range(left, right + 1)]


@dataclass
class DependencyGraph:
    nodes: set = field(default_factory=set)
    edges: set = field(default_factory=set)  # (precedent, dependent)
    precedents: dict = field(default_factory=lambda: defaultdict(set))
    dependents: dict = field(default_factory=lambda: defaultdict(set))
    warnings: list = field(default_factory=list)
    asts: dict = field(default_factory=dict)

    def add_edge(self, pre, dep):
        self.nodes.add(pre)
        self.nodes.add(dep)
        if (pre, dep) not in self.edges:
            self.edges.add((pre, dep))
            self.precedents[dep].add(pre)
            self.dependents[pre].add(dep)

    def sorted_nodes(self) -> list:
        return sorted(self.nodes, key=node_key)


def build_cell_graph(wb: Workbook, expansion_cap: int = DEFAULT_EXPANSION_CAP,
                     asts: dict | None = None, warnings: list | None = None) -> DependencyGraph:
    if asts is None:
        asts, warnings = parse_formulas(wb)
    g = DependencyGraph(warnings=list(warnings or []), asts=asts)
    for addr, _ in wb.iter_cells():
        g.nodes.add(addr)
    for addr, ast in asts.items():
        for span in extract_refs(ast):
            for target in span_targets(span, addr.sheet, wb, expansion_cap):
                g.add_edge(target, addr)
    return g


def node_sheet(node) -> tuple[str, bool]:
    """``(sheet-graph node name, is_external)`` for a cell-graph node."""
    if getattr(node, "book", None):
        return node.book, True
    return node.sheet, False


@dataclass(frozen=True)
class SheetNode:
    name: str
    visibility: Visibility = Visibility.VISIBLE
    is_external: bool = False
    missing: bool = False  # referenced but not present in the workbook


@dataclass
class SheetGraph:
    nodes: list  # SheetNode, workbook sheets in order then externals by name
    edges: dict  # (from, to) -> weight

    def node(self, name: str) -> SheetNode | None:
        return next((n for n in self.nodes if n.name == name), None)


def aggregate_sheet_graph(g: DependencyGraph, wb: Workbook) -> SheetGraph:
    weights: dict = defaultdict(int)
    externals, missing = {}, {}
    for pre, dep in g.edges:
        src, ext = node_sheet(pre)
        dst, _ = node_sheet(dep)
        if ext:
            externals.setdefault(src.lower(), src)
        elif wb.sheet(src) is None:
            missing.setdefault(src.lower(), src)
        if src != dst:
            weights[(src, dst)] += 1
    nodes = [SheetNode(s.name, s.visibility) for s in wb.sheets]
    nodes += [SheetNode(missing[k], missing=True) for k in sorted(missing)]
    nodes += [SheetNode(externals[k], is_external=True) for k in sorted(externals)]
    order = {n.name: i for i, n in enumerate(nodes)}
    edges = {k: weights[k] for k in sorted(weights, key=lambda e: (order[e[0]], order[e[1]]))}
    return SheetGraph(nodes, edges)


def strongly_connected_components(g: DependencyGraph) -> list[list]:
    """Tarjan's algorithm, iterative; components in reverse topological order."""
    index, low, on_stack = {}, {}, set()
    stack, out = [], []
    counter = 0
    succ = {n: sorted(g.dependents.get(n, ()), key=node_key) for n in g.nodes}
    for root in g.sorted_nodes():
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp, key=node_key))
    return out


def _is_cyclic(comp: list, g: DependencyGraph) -> bool:
    return len(comp) > 1 or (comp[0], comp[0]) in g.edges


def _cycle_through(start, members: set, g: DependencyGraph) -> list:
    """Shortest cycle from ``start`` back to itself inside ``members`` (BFS)."""
    if (start, start) in g.edges:
        return [start]
    parent = {start: None}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in sorted(g.dependents.get(v, ()), key=node_key):
            if w == start:
                path = [v]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            if w in members and w not in parent:
                parent[w] = v
                queue.append(w)
    raise AssertionError("component without a cycle")


def find_cycles(g: DependencyGraph) -> list[list]:
    """One representative cycle per cyclic strongly connected component.

    Each cycle starts at the component's smallest node and follows data flow;
    cycles are ordered by that smallest node.
    """
    cycles = [
        _cycle_through(comp[0], set(comp), g)
        for comp in strongly_connected_components(g)
        if _is_cyclic(comp, g)
    ]
    return sorted(cycles, key=lambda c: node_key(c[0]))


def cyclic_components(g: DependencyGraph) -> list[list]:
    comps = [c for c in strongly_connected_components(g) if _is_cyclic(c, g)]
    return sorted(comps, key=lambda c: node_key(c[0]))


@dataclass
class Depths:
    depth: dict  # node -> int or INFINITE_DEPTH
    best_pred: dict  # node -> predecessor on one longest path

    def longest_path(self, node) -> list:
        """A longest precedent path ending at ``node``, source first."""
        if self.depth.get(node, 0) == INFINITE_DEPTH:
            raise ValueError(f"{node} lies on or below a cycle")
        path = [node]
        while path[-1] in self.best_pred:
            path.append(self.best_pred[path[-1]])
        return path[::-1]


def dependency_depths(g: DependencyGraph) -> Depths:
    """Longest precedent path length for every node (Kahn order).

    Members of cycles, and everything downstream of one, get INFINITE_DEPTH.
    """
    depth: dict = {}
    for comp in cyclic_components(g):
        for n in comp:
            depth[n] = INFINITE_DEPTH
    queue = deque(n for n in g.sorted_nodes() if depth.get(n) == INFINITE_DEPTH)
    while queue:
        v = queue.popleft()
        for w in g.dependents.get(v, ()):
            if depth.get(w) != INFINITE_DEPTH:
                depth[w] = INFINITE_DEPTH
                queue.append(w)
    finite = [n for n in g.nodes if n not in depth]
    indeg = {n: len(g.precedents.get(n, ())) for n in finite}
    best: dict = {}
    ready = deque(sorted((n for n in finite if indeg[n] == 0), key=node_key))
    for n in ready:
        depth[n] = 0
    while ready:
        v = ready.popleft()
        for w in sorted(g.dependents.get(v, ()), key=node_key):
            if w not in indeg:
                continue  # feeds into a cycle
            d = depth[v] + 1
            cur = depth.get(w, -1)
            if d > cur or (d == cur and node_key(v) < node_key(best[w])):
                depth[w] = d
                best[w] = v
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return Depths(depth, best)


def dependency_depth(g: DependencyGraph, cell) -> int | float:
    return dependency_depths(g).depth.get(cell, 0)


def is_empty_target(wb: Workbook, node) -> bool:
    if isinstance(node, RangeNode):
        return False
    if isinstance(node, ExternalAddr):
        return wb.external_values.get(node) is None
    cell = wb.cell(node)
    return cell is None or cell.is_blank


def empty_references(wb: Workbook, g: DependencyGraph) -> list[tuple]:
    """``(formula cell, empty target)`` pairs, ordered by formula cell then target."""
    pairs = [(dep, pre) for pre, dep in g.edges if is_empty_target(wb, pre)]
    return sorted(pairs, key=lambda p: (node_key(p[0]), node_key(p[1])))
