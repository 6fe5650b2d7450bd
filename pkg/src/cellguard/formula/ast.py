from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

from ..values import Value, same_value


class RefPoint(NamedTuple):
    col: int
    row: int
    col_abs: bool = False
    row_abs: bool = False


@dataclass(frozen=True)
class RefSpan:
    """A cell or range reference as written, optionally sheet/book qualified.

    ``end`` is None for single cells.  Ranges are normalised so ``start`` is
    the top-left corner.
    """

    sheet: str | None
    book: str | None
    start: RefPoint
    end: RefPoint | None = None

    def __post_init__(self):
        if self.book is not None and self.sheet is None:
            raise ValueError("external reference needs a sheet")
        if self.end is not None:
            s, e = self.start, self.end
            if s.col > e.col:
                s, e = s._replace(col=e.col, col_abs=e.col_abs), e._replace(col=s.col, col_abs=s.col_abs)
            if s.row > e.row:
                s, e = s._replace(row=e.row, row_abs=e.row_abs), e._replace(row=s.row, row_abs=s.row_abs)
            object.__setattr__(self, "start", s)
            object.__setattr__(self, "end", e)

    @property
    def is_range(self) -> bool:
        return self.end is not None

    @property
    def bounds(self) -> tuple[int, int, int, int]:
        """``(top, left, bottom, right)``."""
        e = self.end or self.start
        return self.start.row, self.start.col, e.row, e.col

    @property
    def size(self) -> int:
        top, left, bottom, right = self.bounds
        return (bottom - top + 1) * (right - left + 1)


class Node:
    __slots__ = ()


@dataclass(frozen=True, eq=False)
class Literal(Node):
    value: Value

    def __eq__(self, other):
        return isinstance(other, Literal) and type(self.value) is type(other.value) and (
            self.value == other.value if not isinstance(self.value, float) else same_value(self.value, other.value)
        )

    def __hash__(self):
        return hash((type(self.value), self.value))


@dataclass(frozen=True)
class Ref(Node):
    span: RefSpan


@dataclass(frozen=True)
class Range(Node):
    span: RefSpan


@dataclass(frozen=True)
class Function(Node):
    name: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "name", self.name.upper())
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Unary(Node):
    """Prefix ``-``/``+`` or postfix ``%``."""

    op: str
    child: Node


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Paren(Node):
    child: Node


FormulaAst = Union[Literal, Ref, Range, Function, Unary, Binary, Paren]

COMPARISON_OPS = ("=", "<>", "<", ">", "<=", ">=")

# Binding strength; higher binds tighter.  Unary minus sits above "^" so
# "-2^2" is 4, and "^" is left-associative like the rest.
LEVELS = {
    **{op: 1 for op in COMPARISON_OPS},
    "&": 2,
    "+": 3,
    "-": 3,
    "*": 4,
    "/": 4,
    "^": 5,
}
PERCENT_LEVEL = 6
UNARY_LEVEL = 7
ATOM_LEVEL = 8


def level(node: Node) -> int:
    if isinstance(node, Binary):
        return LEVELS[node.op]
    if isinstance(node, Unary):
        return PERCENT_LEVEL if node.op == "%" else UNARY_LEVEL
    return ATOM_LEVEL


def walk(node: Node):
    """Pre-order traversal, children left to right."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


def children(node: Node) -> tuple:
    if isinstance(node, Function):
        return node.args
    if isinstance(node, (Unary, Paren)):
        return (node.child,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    return ()
