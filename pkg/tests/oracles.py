"""Brute-force reference implementations and random input generators.

Shared by the unit tests and the acceptance suite.  Nothing here imports the
code under test beyond the data model it needs to build inputs.
"""

import itertools
import re

from hypothesis import strategies as st

from cellguard.addr import CellAddr, format_a1, letters_to_col
from cellguard.formula import Binary, Function, Literal, Paren, Range, Ref, RefPoint, RefSpan, Unary
from cellguard.graph import DependencyGraph
from cellguard.values import ErrorCode
from cellguard.workbook import Cell, Sheet, Workbook


SHEETS = ["Alpha", "Be ta", "Gamma", "D4", "Eps"]
REF = re.compile(r"(?:'([^']+)'!|([A-Za-z0-9]+)!)?([A-Z]+)(\d+)(?::([A-Z]+)(\d+))?")


def random_workbook(rng):
    names = SHEETS[: rng.randint(1, 5)]
    sheets = {n: {} for n in names}
    total = rng.randint(1, 40)
    for _ in range(total):
        home = rng.choice(names)
        pos = format_a1(rng.randint(1, 6), rng.randint(1, 4))
        if rng.random() < 0.5:
            sheets[home][pos] = rng.randint(1, 9)
            continue
        parts = []
        for _ in range(rng.randint(1, 3)):
            target = rng.choice(names + ["Ghost"])
            q = f"'{target}'!" if " " in target else f"{target}!"
            prefix = "" if rng.random() < 0.4 else q
            a = format_a1(rng.randint(1, 6), rng.randint(1, 4))
            if rng.random() < 0.3:
                b = format_a1(rng.randint(1, 6), rng.randint(1, 4))
                parts.append(f"SUM({prefix}{a}:{b})")
            else:
                parts.append(prefix + a)
        sheets[home][pos] = "=" + "+".join(parts)
    return Workbook.from_mapping(sheets)


def oracle_edges(wb):
    """Edges straight from the formula text, expanding ranges by hand."""
    edges = set()
    for s in wb.sheets:
        for (row, col), cell in s.cells.items():
            if not cell.is_formula:
                continue
            dep = CellAddr(s.name, row, col)
            for quoted, plain, c1, r1, c2, r2 in REF.findall(cell.formula):
                sheet = quoted or plain or s.name
                sheet = wb.canonical_sheet_name(sheet)
                c2, r2 = c2 or c1, r2 or r1
                rows = range(min(int(r1), int(r2)), max(int(r1), int(r2)) + 1)
                cols = range(min(letters_to_col(c1), letters_to_col(c2)),
                             max(letters_to_col(c1), letters_to_col(c2)) + 1)
                for r, c in itertools.product(rows, cols):
                    edges.add((CellAddr(sheet, r, c), dep))
    return edges


def random_graph(rng, n, p):
    g = DependencyGraph()
    nodes = [CellAddr("S", i + 1, 1) for i in range(n)]
    g.nodes.update(nodes)
    for a, b in itertools.product(nodes, nodes):
        if rng.random() < p:
            g.add_edge(a, b)
    return g, nodes


def reachability(g, nodes):
    reach = {a: {b for b in nodes if (a, b) in g.edges} for a in nodes}
    for k in nodes:
        for i in nodes:
            if k in reach[i]:
                reach[i] |= reach[k]
    return reach


def simple_cycles(g, nodes):
    """Every simple cycle, found by brute-force DFS from each start node."""
    out = []
    index = {n: i for i, n in enumerate(nodes)}

    def dfs(start, v, path, seen):
        for w in g.dependents.get(v, ()):
            if w == start:
                out.append(list(path))
            elif index[w] > index[start] and w not in seen:
                seen.add(w)
                path.append(w)
                dfs(start, w, path, seen)
                path.pop()
                seen.discard(w)

    for s in nodes:
        dfs(s, s, [s], {s})
    return out


def random_sheet(rng, size):
    """Formulas written so each column of a form copy-fills the same text."""
    cells = {}
    n_forms = rng.randint(1, 3)
    for r, c in itertools.product(range(1, size + 1), range(1, size + 1)):
        x = rng.random()
        if x < 0.6:
            k = rng.randrange(n_forms)
            # Relative refs shifted by (r, c) keep the normal form fixed.
            text = {0: f"={format_a1(r, c + 20)}+1", 1: "=$A$1*2",
                    2: f"={format_a1(r, c + 21)}-{format_a1(r, c + 20)}"}[k]
            cells[(r, c)] = Cell(None, text)
        elif x < 0.75:
            cells[(r, c)] = Cell(float(rng.randint(1, 9)))
    return Sheet("S", cells)


def brute_rectangles(cells):
    cells = set(cells)
    if not cells:
        return []
    rows = [r for r, _ in cells]
    cols = [c for _, c in cells]
    rects = []
    for t, b in itertools.combinations_with_replacement(range(min(rows), max(rows) + 1), 2):
        for l, r in itertools.combinations_with_replacement(range(min(cols), max(cols) + 1), 2):
            if all((i, j) in cells for i in range(t, b + 1) for j in range(l, r + 1)):
                rects.append((t, l, b, r))

    def inside(a, b):
        return a != b and b[0] <= a[0] and b[1] <= a[1] and a[2] <= b[2] and a[3] <= b[3]

    return sorted(a for a in rects if not any(inside(a, b) for b in rects))


# Random formula trees.
names = st.sampled_from(["Data", "Mexico City", "O'Brien", "S1"])
points = st.builds(RefPoint, st.integers(1, 300), st.integers(1, 2000), st.booleans(), st.booleans())


@st.composite
def spans(draw, ranged):
    sheet = draw(st.none() | names)
    book = draw(st.none() | st.sampled_from(["Rates.xlsx", "Q 1.xlsx"])) if sheet else None
    start = draw(points)
    end = draw(points) if ranged else None
    return RefSpan(sheet, book, start, end)


literals = st.one_of(
    st.floats(0, 1e6, allow_nan=False).map(lambda x: Literal(round(x, 4))),
    st.integers(0, 10 ** 6).map(lambda n: Literal(float(n))),
    st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=6).map(Literal),
    st.booleans().map(Literal),
    st.sampled_from(list(ErrorCode)).map(Literal),
)
leaves = st.one_of(literals, spans(False).map(Ref), spans(True).map(Range))
BINOPS = ["+", "-", "*", "/", "^", "&", "=", "<>", "<", ">", "<=", ">="]


def extend(children):
    return st.one_of(
        st.builds(Binary, st.sampled_from(BINOPS), children, children),
        st.builds(Unary, st.sampled_from(["-", "+", "%"]), children),
        st.builds(Paren, children),
        st.builds(Function, st.sampled_from(["SUM", "IF", "AVERAGE", "NPV"]),
                  st.lists(children, min_size=1, max_size=3).map(tuple)),
    )


trees = st.recursive(leaves, extend, max_leaves=12)


def strip(n):
    if isinstance(n, Paren):
        return strip(n.child)
    if isinstance(n, Binary):
        return Binary(n.op, strip(n.left), strip(n.right))
    if isinstance(n, Unary):
        return Unary(n.op, strip(n.child))
    if isinstance(n, Function):
        return Function(n.name, tuple(strip(a) for a in n.args))
    return n
