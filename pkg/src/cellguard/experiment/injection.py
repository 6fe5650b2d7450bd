"""Seeded fault injection: plant known errors of each taxonomy category.

Every category has an eligibility rule and one mutation family:

* Reference: move or shrink a range bound by one row or column.
* FinancialFormula: swap a binary operator (``+``/``-``, ``*``/``/``).
* ExcelLogic: call a sibling function (SUM -> AVERAGE, IRR -> XIRR, ...).
* Interface: point an external reference at a workbook that is not there.
* Input: transpose two adjacent, different digits of an integer literal.
* UserRelated: replace a copy-filled formula with its cached value.
* ControlEnvironment: overwrite a copy-filled formula with a made-up number.

Targets are spaced so no two share a row or column within three cells;
otherwise two neighbouring injections could mask each other.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from ..addr import CellAddr, parse_range_text
from ..formula import (
    Binary,
    FormulaSyntaxError,
    Function,
    Paren,
    Range,
    Ref,
    RefPoint,
    RefSpan,
    Unary,
    extract_refs,
    parse,
    print_formula,
    relative_normal_form,
)
from ..graph import build_cell_graph
from ..risk.model import ErrorCategory
from ..values import is_number, value_from_json, value_to_json
from ..workbook import Cell, Workbook
from ..workbook.evaluator import refresh_values

# Same-row/column targets closer than this could hide each other.
MIN_SPACING = 4
# A copy-filled run must be this long for an overwrite to stand out.
MIN_RUN_FOR_TARGET = 4

SIBLING_FUNCTIONS = {
    "SUM": "AVERAGE",
    "AVERAGE": "SUM",
    "IRR": "XIRR",
    "XIRR": "IRR",
    "NPV": "XNPV",
    "XNPV": "NPV",
    "MAX": "MIN",
    "MIN": "MAX",
    "COUNT": "COUNTA",
    "ROUND": "ROUNDUP",
    "VLOOKUP": "HLOOKUP",
}
SWAPPED_OPERATORS = {"+": "-", "-": "+", "*": "/", "/": "*"}


class InsufficientTargets(ValueError):
    def __init__(self, category: ErrorCategory, wanted: int, available: int):
        self.category, self.wanted, self.available = category, wanted, available
        super().__init__(f"{category.value}: wanted {wanted} target(s), only {available} eligible")


class PlanMismatch(ValueError):
    """The workbook does not hold what the plan expects at a target."""


@dataclass(frozen=True)
class InjectionEntry:
    category: ErrorCategory
    target: CellAddr
    mutation: str
    original: Cell
    mutated: Cell

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "target": str(self.target),
            "mutation": self.mutation,
            "original": _cell_to_dict(self.original),
            "mutated": _cell_to_dict(self.mutated),
        }

    @classmethod
    def from_dict(cls, d: dict) -> InjectionEntry:
        r = parse_range_text(d["target"])
        if r.size != 1 or r.book:
            raise ValueError(f"target must be a single internal cell: {d['target']!r}")
        return cls(ErrorCategory.parse(d["category"]), CellAddr(r.sheet, r.top, r.left),
                   d.get("mutation", ""), _cell_from_dict(d["original"]), _cell_from_dict(d["mutated"]))


@dataclass(frozen=True)
class InjectionPlan:
    seed: int
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        targets = [_key(e.target) for e in self.entries]
        if len(set(targets)) != len(targets):
            raise ValueError("plan targets must be distinct")

    @property
    def targets(self) -> list[CellAddr]:
        return [e.target for e in self.entries]

    def to_json(self) -> str:
        doc = {"seed": self.seed, "entries": [e.to_dict() for e in self.entries]}
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> InjectionPlan:
        """Read a plan file; a bare list of entries is accepted too (seed 0)."""
        data = json.loads(text)
        if isinstance(data, list):
            data = {"seed": 0, "entries": data}
        return cls(int(data.get("seed", 0)), tuple(InjectionEntry.from_dict(e) for e in data["entries"]))


def _cell_to_dict(c: Cell) -> dict:
    d = {"v": value_to_json(c.value)}
    if c.formula is not None:
        d["f"] = c.formula
    return d


def _cell_from_dict(d: dict) -> Cell:
    return Cell(value_from_json(d.get("v")), d.get("f"))


def _key(addr: CellAddr) -> tuple:
    return addr.sheet.lower(), addr.row, addr.col


def _too_close(a: CellAddr, b: CellAddr) -> bool:
    if a.sheet.lower() != b.sheet.lower():
        return False
    if a.row == b.row:
        return abs(a.col - b.col) < MIN_SPACING
    if a.col == b.col:
        return abs(a.row - b.row) < MIN_SPACING
    return False


# -- AST surgery -------------------------------------------------------------

def _paths(node, path=()):
    """Pre-order ``(path, node)`` pairs; a path is a tuple of child indices."""
    yield path, node
    if isinstance(node, Function):
        kids = node.args
    elif isinstance(node, (Unary, Paren)):
        kids = (node.child,)
    elif isinstance(node, Binary):
        kids = (node.left, node.right)
    else:
        kids = ()
    for i, k in enumerate(kids):
        yield from _paths(k, path + (i,))


def _replace(node, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(node, Function):
        args = list(node.args)
        args[i] = _replace(args[i], rest, new)
        return Function(node.name, tuple(args))
    if isinstance(node, Unary):
        return Unary(node.op, _replace(node.child, rest, new))
    if isinstance(node, Paren):
        return Paren(_replace(node.child, rest, new))
    if isinstance(node, Binary):
        if i == 0:
            return Binary(node.op, _replace(node.left, rest, new), node.right)
        return Binary(node.op, node.left, _replace(node.right, rest, new))
    raise ValueError("path runs past a leaf")


# -- eligibility -------------------------------------------------------------

class _Survey:
    """Parsed formulas and copy-fill runs, computed once per plan."""

    def __init__(self, wb: Workbook):
        self.wb = wb
        self.asts: dict = {}
        self.forms: dict = {}
        for addr, cell in wb.formula_cells():
            try:
                ast = parse(cell.formula)
            except FormulaSyntaxError:
                continue
            self.asts[addr] = ast
            self.forms[_key(addr)] = relative_normal_form(ast, addr)

    def in_long_run(self, addr: CellAddr) -> bool:
        """True if ``addr`` sits in a row or column run of equal normal forms.

        The run must be at least MIN_RUN_FOR_TARGET long and no run member
        next to ``addr`` may reference it, so the cell is not the seed of a
        running total.
        """
        form = self.forms.get(_key(addr))
        if form is None:
            return False
        for dr, dc in ((1, 0), (0, 1)):
            members = [addr]
            for sign in (-1, 1):
                k = 1
                while True:
                    other = CellAddr(addr.sheet, addr.row + sign * k * dr, addr.col + sign * k * dc)
                    if self.forms.get(_key(other)) != form:
                        break
                    members.append(other)
                    k += 1
            if len(members) < MIN_RUN_FOR_TARGET:
                continue
            neighbours = [CellAddr(addr.sheet, addr.row + s * dr, addr.col + s * dc) for s in (-1, 1)]
            if not any(self._references(n, addr) for n in neighbours if n in self.asts):
                return True
        return False

    def _references(self, src: CellAddr, target: CellAddr) -> bool:
        for span in extract_refs(self.asts[src], src.sheet):
            if span.book is None and (span.sheet or src.sheet).lower() == target.sheet.lower():
                top, left, bottom, right = span.bounds
                if top <= target.row <= bottom and left <= target.col <= right:
                    return True
        return False


def _digit_swaps(value) -> list[int]:
    if not is_number(value) or isinstance(value, bool) or value != int(value) or abs(value) < 10:
        return []
    digits = str(abs(int(value)))
    return [i for i in range(len(digits) - 1) if digits[i] != digits[i + 1]]


def _eligible(survey: _Survey, category: ErrorCategory) -> list[CellAddr]:
    wb = survey.wb
    if category is ErrorCategory.INPUT:
        return [a for a, c in wb.iter_cells() if not c.is_formula and _digit_swaps(c.value)]
    out = []
    for addr, ast in survey.asts.items():
        nodes = [n for _, n in _paths(ast)]
        if category is ErrorCategory.REFERENCE:
            ok = any(isinstance(n, Range) for n in nodes) and survey.in_long_run(addr)
        elif category is ErrorCategory.FINANCIAL_FORMULA:
            ok = any(isinstance(n, Binary) and n.op in SWAPPED_OPERATORS for n in nodes)
        elif category is ErrorCategory.EXCEL_LOGIC:
            ok = any(isinstance(n, Function) and n.name in SIBLING_FUNCTIONS for n in nodes)
        elif category is ErrorCategory.INTERFACE:
            ok = True
        elif category is ErrorCategory.USER_RELATED:
            cached = wb.value_at(addr)
            ok = cached is not None and survey.in_long_run(addr)
        else:
            ok = survey.in_long_run(addr)
        if ok:
            out.append(addr)
    return out


# -- mutations ---------------------------------------------------------------

def _mutate(survey: _Survey, category: ErrorCategory, addr: CellAddr, rng: random.Random, books: set):
    """``(description, mutated cell)`` or None when this target cannot take the mutation."""
    wb = survey.wb
    cell = wb.cell(addr)
    if category is ErrorCategory.INPUT:
        swaps = _digit_swaps(cell.value)
        i = rng.choice(swaps)
        digits = list(str(abs(int(cell.value))))
        digits[i], digits[i + 1] = digits[i + 1], digits[i]
        new = int("".join(digits)) * (-1 if cell.value < 0 else 1)
        return f"transpose digits {int(cell.value)} -> {new}", Cell(new)
    if category is ErrorCategory.USER_RELATED:
        return "replace formula with its cached value", Cell(cell.value)
    if category is ErrorCategory.CONTROL_ENVIRONMENT:
        while True:
            n = rng.randint(1, 999)
            if not (is_number(cell.value) and float(n) == float(cell.value)):
                break
        return f"overwrite formula with {n}", Cell(n)

    ast = survey.asts[addr]
    nodes = list(_paths(ast))
    if category is ErrorCategory.REFERENCE:
        path, node = rng.choice([(p, n) for p, n in nodes if isinstance(n, Range)])
        span = _bumped_range(node.span, addr, rng)
        if span is None:
            return None
        new = _replace(ast, path, Range(span))
        what = "range bound moved by one"
    elif category is ErrorCategory.FINANCIAL_FORMULA:
        path, node = rng.choice([(p, n) for p, n in nodes if isinstance(n, Binary) and n.op in SWAPPED_OPERATORS])
        new = _replace(ast, path, Binary(SWAPPED_OPERATORS[node.op], node.left, node.right))
        what = f"operator {node.op} -> {SWAPPED_OPERATORS[node.op]}"
    elif category is ErrorCategory.EXCEL_LOGIC:
        path, node = rng.choice([(p, n) for p, n in nodes if isinstance(n, Function) and n.name in SIBLING_FUNCTIONS])
        new = _replace(ast, path, Function(SIBLING_FUNCTIONS[node.name], node.args))
        what = f"{node.name} -> {SIBLING_FUNCTIONS[node.name]}"
    else:
        missing = _missing_book(books)
        externals = [(p, n) for p, n in nodes if isinstance(n, (Ref, Range)) and n.span.book is not None]
        if externals:
            path, node = rng.choice(externals)
            span = RefSpan(node.span.sheet, missing, node.span.start, node.span.end)
            new = _replace(ast, path, type(node)(span))
            what = f"external book {node.span.book} -> {missing}"
        else:
            new = Binary("+", ast, Ref(RefSpan("Data", missing, RefPoint(1, 1))))
            what = f"add reference to {missing}"
        books.add(missing.lower())
    return what, Cell(None, print_formula(new))


def _bumped_range(span: RefSpan, home: CellAddr, rng: random.Random) -> RefSpan | None:
    """Shrink the far bound by one, or shift the range up/left by one.

    Shifting never moves towards the host cell's own row or column, so the
    mutation cannot create a self-reference.
    """
    top, left, bottom, right = span.bounds
    vertical = bottom > top
    s, e = span.start, span.end
    options = []
    if vertical:
        options.append(RefSpan(span.sheet, span.book, s, e._replace(row=e.row - 1)))
        if top > 1:
            options.append(RefSpan(span.sheet, span.book, s._replace(row=s.row - 1), e._replace(row=e.row - 1)))
    elif right > left:
        options.append(RefSpan(span.sheet, span.book, s, e._replace(col=e.col - 1)))
        if left > 1:
            options.append(RefSpan(span.sheet, span.book, s._replace(col=s.col - 1), e._replace(col=e.col - 1)))
    rng.shuffle(options)
    for cand in options:
        t, l, b, r = cand.bounds
        same_sheet = (cand.sheet or home.sheet).lower() == home.sheet.lower() and cand.book is None
        if same_sheet and t <= home.row <= b and l <= home.col <= r:
            continue
        if t == b and l == r:
            # A one-cell range prints as a plain reference; keep the Range node honest.
            cand = RefSpan(cand.sheet, cand.book, cand.start, cand.start)
        return cand
    return None


def _missing_book(taken: set) -> str:
    k = 1
    while f"missing{k}.xlsx" in taken:
        k += 1
    return f"Missing{k}.xlsx"


# -- public API --------------------------------------------------------------

def plan_injection(wb: Workbook, mix: dict, seed: int) -> InjectionPlan:
    """Choose targets and mutations for ``mix`` (category -> count), seeded.

    Categories are processed in taxonomy order, each drawing from its own
    shuffled candidate list, so the plan depends only on (wb, mix, seed).
    """
    rng = random.Random(seed)
    survey = _Survey(wb)
    books = {s.name.lower() for s in wb.external_sources}
    chosen: list[InjectionEntry] = []
    wanted = {ErrorCategory.parse(k) if isinstance(k, str) else k: int(n) for k, n in mix.items()}
    for category in sorted(wanted, key=lambda c: c.number):
        n = wanted[category]
        if n < 0:
            raise ValueError(f"negative count for {category.value}")
        if n == 0:
            continue
        candidates = _eligible(survey, category)
        rng.shuffle(candidates)
        got = 0
        for addr in candidates:
            if got == n:
                break
            if any(_key(addr) == _key(e.target) or _too_close(addr, e.target) for e in chosen):
                continue
            result = _mutate(survey, category, addr, rng, books)
            if result is None:
                continue
            what, mutated = result
            chosen.append(InjectionEntry(category, addr, what, wb.cell(addr), mutated))
            got += 1
        if got < n:
            raise InsufficientTargets(category, n, got)
    return InjectionPlan(seed, tuple(chosen))


def apply_injection(wb: Workbook, plan: InjectionPlan) -> Workbook:
    """The mutated workbook, with caches of changed formulas and their dependents refreshed.

    Cells the evaluator cannot compute keep a None (stale) cache.
    """
    updates = {}
    for e in plan.entries:
        current = wb.cell(e.target)
        if current is None or current != e.original:
            raise PlanMismatch(f"{e.target}: expected {e.original!r}, found {current!r}")
        updates[e.target] = e.mutated
    if not updates:
        return wb.with_cells({})
    mutated = wb.with_cells(updates)
    g = build_cell_graph(mutated)
    dirty, todo = set(), [CellAddr(mutated.canonical_sheet_name(t.sheet), t.row, t.col) for t in updates]
    while todo:
        node = todo.pop()
        if node in dirty:
            continue
        dirty.add(node)
        todo.extend(d for d in g.dependents.get(node, ()) if isinstance(d, CellAddr))
    formulas = sorted((a for a in dirty if (c := mutated.cell(a)) is not None and c.is_formula),
                      key=lambda a: (mutated.sheet_index(a.sheet), a.row, a.col))
    values = refresh_values(mutated, formulas)
    return mutated.with_cells({a: Cell(v, mutated.cell(a).formula) for a, v in values.items()})


def parse_mix(text: str) -> dict:
    """``"cat1=2,cat7=1"`` -> ``{ErrorCategory.REFERENCE: 2, ...}``."""
    mix: dict = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, count = part.partition("=")
        if not sep:
            raise ValueError(f"mix entries look like cat<k>=<n>, got {part!r}")
        try:
            n = int(count)
        except ValueError:
            raise ValueError(f"count must be an integer in {part!r}") from None
        if n < 0:
            raise ValueError(f"count must be non-negative in {part!r}")
        category = ErrorCategory.parse(name.strip())
        mix[category] = mix.get(category, 0) + n
    return mix
