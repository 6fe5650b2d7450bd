"""Reference extraction, copy-fill normal form, translation and metrics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

from ..addr import MAX_COL, MAX_ROW, CellAddr, sheet_prefix
from .ast import (
    Binary,
    Function,
    Literal,
    Node,
    Paren,
    Range,
    Ref,
    RefPoint,
    RefSpan,
    Unary,
    children,
    walk,
)
from .printer import to_text


def extract_refs(ast: Node, home_sheet: str | None = None) -> list[RefSpan]:
    """Every reference in source order; unqualified ones get ``home_sheet``."""
    out = []
    for n in walk(ast):
        if isinstance(n, (Ref, Range)):
            span = n.span
            if span.sheet is None and home_sheet is not None:
                span = replace(span, sheet=home_sheet)
            out.append(span)
    return out


def _r1c1_axis(letter: str, value: int, origin: int, absolute: bool) -> str:
    if absolute:
        return f"{letter}{value}"
    offset = value - origin
    return letter if offset == 0 else f"{letter}[{offset}]"


def _r1c1_point(p: RefPoint, origin: CellAddr) -> str:
    return _r1c1_axis("R", p.row, origin.row, p.row_abs) + _r1c1_axis("C", p.col, origin.col, p.col_abs)


def relative_normal_form(ast: Node, origin: CellAddr) -> str:
    """R1C1-style text of ``ast`` as seen from ``origin``.

    Copy-fill equivalent formulas in different cells give identical strings:
    ``=A1`` in B1 becomes ``RC[-1]``; ``=$A$1`` is ``R1C1`` everywhere.
    """

    def ref_text(span: RefSpan) -> str:
        text = sheet_prefix(span.sheet, span.book)
        s, e = span.start, span.end
        if e is None:
            return text + _r1c1_point(s, origin)
        rows = [_r1c1_axis("R", p.row, origin.row, p.row_abs) for p in (s, e)]
        cols = [_r1c1_axis("C", p.col, origin.col, p.col_abs) for p in (s, e)]
        # With mixed anchoring on an axis (A1:$A1) a copy-fill can swap
        # which end is smaller, so that axis is written in sorted order.
        if s.row_abs != e.row_abs:
            rows.sort()
        if s.col_abs != e.col_abs:
            cols.sort()
        return text + f"{rows[0]}{cols[0]}:{rows[1]}{cols[1]}"

    return to_text(ast, ref_text=ref_text)


class TranslationError(ValueError):
    """Raised when shifting a formula would push a reference off the sheet."""


def _shift_point(p: RefPoint, dr: int, dc: int, move_absolute: bool) -> RefPoint:
    row = p.row + (dr if move_absolute or not p.row_abs else 0)
    col = p.col + (dc if move_absolute or not p.col_abs else 0)
    if not (1 <= row <= MAX_ROW and 1 <= col <= MAX_COL):
        raise TranslationError(f"reference moved off the sheet ({row}, {col})")
    return RefPoint(col, row, p.col_abs, p.row_abs)


def translate(ast: Node, dr: int, dc: int, move_absolute: bool = False) -> Node:
    """Shift references as a copy-fill by ``(dr, dc)`` would.

    With ``move_absolute`` every reference moves, as when the referenced
    cells themselves are cut and pasted.
    """

    def go(n: Node) -> Node:
        if isinstance(n, (Ref, Range)):
            s = n.span
            end = _shift_point(s.end, dr, dc, move_absolute) if s.end is not None else None
            return type(n)(RefSpan(s.sheet, s.book, _shift_point(s.start, dr, dc, move_absolute), end))
        if isinstance(n, Function):
            return Function(n.name, tuple(go(a) for a in n.args))
        if isinstance(n, Unary):
            return Unary(n.op, go(n.child))
        if isinstance(n, Binary):
            return Binary(n.op, go(n.left), go(n.right))
        if isinstance(n, Paren):
            return Paren(go(n.child))
        return n

    return go(ast)


@dataclass
class FormulaMetrics:
    function_count: int = 0
    distinct_ref_groups: int = 0
    numeric_literals: list[float] = field(default_factory=list)
    max_nesting_depth: int = 0
    sheets_referenced: Counter = field(default_factory=Counter)


def _is_pure_reference(n: Node) -> bool:
    if isinstance(n, (Ref, Range)):
        return True
    if isinstance(n, (Binary, Unary, Paren)):
        return all(_is_pure_reference(c) for c in children(n))
    return False


def ref_groups(ast: Node) -> list[Node]:
    """Maximal operator subtrees whose operands are all references.

    ``London!B4+London!B5+London!B6`` is one group; in ``1.5*J4+J3`` the
    literal splits it into ``J4`` and ``J3``.
    """
    out = []

    def go(n: Node):
        if _is_pure_reference(n):
            out.append(n)
            return
        for c in children(n):
            go(c)

    go(ast)
    return out


def _strip_parens(n: Node) -> Node:
    while isinstance(n, Paren):
        n = n.child
    return n


def _function_depth(n: Node) -> int:
    below = max((_function_depth(c) for c in children(n)), default=0)
    return below + 1 if isinstance(n, Function) else below


def metrics(ast: Node, home_sheet: str | None = None) -> FormulaMetrics:
    m = FormulaMetrics()

    def go(n: Node):
        if isinstance(n, Function):
            m.function_count += 1
        elif isinstance(n, Literal) and isinstance(n.value, float):
            m.numeric_literals.append(n.value)
        elif isinstance(n, Unary) and n.op == "-" and isinstance(n.child, Literal) \
                and isinstance(n.child.value, float):
            m.numeric_literals.append(-n.child.value)
            return
        elif isinstance(n, (Ref, Range)):
            sheet = n.span.sheet or home_sheet
            if sheet is not None:
                m.sheets_referenced[sheet] += 1
        for c in children(n):
            go(c)

    go(ast)
    m.distinct_ref_groups = len({to_text(_strip_parens(g)) for g in ref_groups(ast)})
    m.max_nesting_depth = _function_depth(ast)
    return m
