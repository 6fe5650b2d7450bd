import itertools
import math
import random

import pytest

from cellguard.addr import CellAddr, ExternalAddr, RangeNode
from cellguard.graph import (
    INFINITE_DEPTH,
    DependencyGraph,
    aggregate_sheet_graph,
    build_cell_graph,
    cyclic_components,
    dependency_depths,
    empty_references,
    find_cycles,
    strongly_connected_components,
)
from cellguard.workbook import Visibility, Workbook
from oracles import oracle_edges, random_graph, random_workbook, reachability, simple_cycles

def test_cell_graph_matches_text_oracle():
    rng = random.Random(5)
    for _ in range(200):
        wb = random_workbook(rng)
        g = build_cell_graph(wb)
        want = oracle_edges(wb)
        assert g.edges == want
        cells = {a for a, _ in wb.iter_cells()}
        assert g.nodes == cells | {n for e in want for n in e}
        for pre, dep in want:
            assert pre in g.precedents[dep] and dep in g.dependents[pre]


def test_expansion_cap_keeps_big_ranges_whole():
    wb = Workbook.from_mapping({"S": {"A1": "=SUM(B1:B100)"}})
    g = build_cell_graph(wb, expansion_cap=50)
    assert g.precedents[CellAddr("S", 1, 1)] == {RangeNode("S", 1, 2, 100, 2)}


def test_cycles_match_exhaustive_search():
    rng = random.Random(9)
    for _ in range(300):
        n = rng.randint(1, 12)
        g, nodes = random_graph(rng, n, rng.choice([0.05, 0.1, 0.2]))
        reach = reachability(g, nodes)
        # SCC partition by mutual reachability.
        comps = strongly_connected_components(g)
        assert sorted(n for c in comps for n in c) == sorted(nodes)
        for c in comps:
            for a, b in itertools.permutations(c, 2):
                assert b in reach[a] and a in reach[b]
        for a, b in itertools.combinations(nodes, 2):
            same = next(c for c in comps if a in c) is next(c for c in comps if b in c)
            assert same == (b in reach[a] and a in reach[b])

        cycles = simple_cycles(g, nodes)
        on_cycle = {v for cyc in cycles for v in cyc}
        cyclic = cyclic_components(g)
        assert {v for c in cyclic for v in c} == on_cycle
        # Every simple cycle lies inside one cyclic component.
        for cyc in cycles:
            assert any(set(cyc) <= set(c) for c in cyclic)
        found = find_cycles(g)
        assert len(found) == len(cyclic)
        for cyc, comp in zip(found, cyclic):
            assert set(cyc) <= set(comp) and cyc[0] == comp[0]
            assert len(set(cyc)) == len(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                assert (a, b) in g.edges


def _longest_by_enumeration(g, node, memo):
    if node in memo:
        return memo[node]
    best = 0
    for p in g.precedents.get(node, ()):
        best = max(best, _longest_by_enumeration(g, p, memo) + 1)
    memo[node] = best
    return best


def test_depths_match_path_enumeration():
    rng = random.Random(3)
    for _ in range(200):
        n = rng.randint(1, 12)
        g, nodes = random_graph(rng, n, 0.15)
        reach = reachability(g, nodes)
        depths = dependency_depths(g)
        poisoned = {v for v in nodes if v in reach[v]}
        poisoned |= {w for v in set(poisoned) for w in reach[v]}
        acyclic = DependencyGraph()
        for a, b in g.edges:
            if a not in poisoned and b not in poisoned:
                acyclic.add_edge(a, b)
        memo = {}
        for v in nodes:
            if v in poisoned:
                assert depths.depth[v] == INFINITE_DEPTH
            else:
                want = _longest_by_enumeration(acyclic, v, memo)
                assert depths.depth[v] == want
                path = depths.longest_path(v)
                assert len(path) == want + 1 and path[-1] == v
                for a, b in zip(path, path[1:]):
                    assert (a, b) in g.edges


def test_longest_path_refuses_cycles():
    g = DependencyGraph()
    a, b = CellAddr("S", 1, 1), CellAddr("S", 2, 1)
    g.add_edge(a, b)
    g.add_edge(b, a)
    assert math.isinf(dependency_depths(g).depth[a])
    with pytest.raises(ValueError):
        dependency_depths(g).longest_path(a)


def test_self_loop_is_a_cycle():
    wb = Workbook.from_mapping({"S": {"A1": "=A1+1"}})
    assert find_cycles(build_cell_graph(wb)) == [[CellAddr("S", 1, 1)]]


def test_sheet_graph(visual, figure4):
    sg = aggregate_sheet_graph(build_cell_graph(visual), visual)
    assert [n.name for n in sg.nodes] == ["Main", "Data", "Hidden", "Secret", "Budget.xlsx"]
    assert sg.node("Secret").visibility is Visibility.VERY_HIDDEN
    assert sg.node("Budget.xlsx").is_external
    assert sg.edges == {("Data", "Main"): 20, ("Hidden", "Main"): 5, ("Budget.xlsx", "Main"): 1}
    sg = aggregate_sheet_graph(build_cell_graph(figure4), figure4)
    assert sg.edges[("London", "Sao Paolo")] == 49


def test_missing_sheet_node():
    wb = Workbook.from_mapping({"S": {"A1": "=Gone!A1"}})
    sg = aggregate_sheet_graph(build_cell_graph(wb), wb)
    assert sg.node("Gone").missing


def test_empty_references(figure4):
    pairs = empty_references(figure4, build_cell_graph(figure4))
    assert pairs == [(CellAddr("Mexico City", 4, 10), CellAddr("New York", 34, 7))]
    wb = Workbook.from_mapping({"S": {"A1": "='[B.xlsx]X'!A1"}})
    assert empty_references(wb, build_cell_graph(wb)) == [
        (CellAddr("S", 1, 1), ExternalAddr("B.xlsx", "X", 1, 1))]
