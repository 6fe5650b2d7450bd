from __future__ import annotations

from typing import Callable

from ..addr import col_to_letters, sheet_prefix
from ..values import POINT, ErrorCode, Locale, format_number
from .ast import (
    LEVELS,
    PERCENT_LEVEL,
    UNARY_LEVEL,
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
    level,
)


def _a1_point(p: RefPoint) -> str:
    return f"{'$' if p.col_abs else ''}{col_to_letters(p.col)}{'$' if p.row_abs else ''}{p.row}"


def a1_span(span: RefSpan) -> str:
    text = sheet_prefix(span.sheet, span.book) + _a1_point(span.start)
    if span.end is not None:
        text += ":" + _a1_point(span.end)
    return text


def _literal(value, locale: Locale) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, ErrorCode):
        return value.value
    if isinstance(value, str):
        return '"' + value.replace('"', '""') + '"'
    return format_number(value, locale)


def to_text(node: Node, locale: Locale = POINT, ref_text: Callable[[RefSpan], str] = a1_span) -> str:
    """Render an AST without the leading ``=``.

    Parentheses are inserted where the tree shape needs them, so hand-built
    trees print correctly; trees produced by ``parse`` already carry explicit
    :class:`Paren` nodes and come back out unchanged.
    """

    def wrap(child: Node, min_level: int) -> str:
        text = go(child)
        return f"({text})" if level(child) < min_level else text

    def go(n: Node) -> str:
        if isinstance(n, Literal):
            return _literal(n.value, locale)
        if isinstance(n, (Ref, Range)):
            return ref_text(n.span)
        if isinstance(n, Paren):
            return f"({go(n.child)})"
        if isinstance(n, Function):
            return f"{n.name}(" + locale.list_sep.join(go(a) for a in n.args) + ")"
        if isinstance(n, Unary):
            if n.op == "%":
                return wrap(n.child, PERCENT_LEVEL) + "%"
            return n.op + wrap(n.child, UNARY_LEVEL)
        if isinstance(n, Binary):
            lvl = LEVELS[n.op]
            return wrap(n.left, lvl) + n.op + wrap(n.right, lvl + 1)
        raise TypeError(f"not a formula node: {n!r}")

    return go(node)


def print_formula(node: Node, locale: Locale = POINT) -> str:
    return "=" + to_text(node, locale)
