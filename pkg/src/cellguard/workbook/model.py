from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, NamedTuple

from ..addr import CellAddr, ExternalAddr, in_bounds, parse_a1
from ..formula import FormulaSyntaxError, extract_refs, parse
from ..values import ErrorCode, Value, is_number, same_value


class WorkbookError(ValueError):
    pass


class Visibility(str, enum.Enum):
    VISIBLE = "visible"
    HIDDEN = "hidden"
    VERY_HIDDEN = "very_hidden"


@dataclass(frozen=True, eq=False)
class Cell:
    """Cell content: a literal ``value``, or a ``formula`` with its cached value.

    A formula cell whose ``value`` is None has no (or a stale) cached result.
    """

    value: Value = None
    formula: str | None = None

    def __post_init__(self):
        if self.formula is not None and not self.formula.startswith("="):
            raise WorkbookError(f"formula must start with '=': {self.formula!r}")
        if isinstance(self.value, int) and not isinstance(self.value, bool):
            object.__setattr__(self, "value", float(self.value))

    @property
    def is_formula(self) -> bool:
        return self.formula is not None

    @property
    def is_blank(self) -> bool:
        return self.formula is None and self.value is None

    def __eq__(self, other):
        if not isinstance(other, Cell):
            return NotImplemented
        return self.formula == other.formula and (
            (self.value is None and other.value is None) or same_value(self.value, other.value)
        )

    def __hash__(self):
        v = self.value
        return hash((self.formula, type(v).__name__, round(v, 6) if is_number(v) else v))

    def __repr__(self):
        if self.formula is not None:
            return f"Cell({self.formula!r}, cached={self.value!r})"
        return f"Cell({self.value!r})"


def formula(text: str, cached: Value = None) -> Cell:
    return Cell(cached, text)


def literal(value: Value) -> Cell:
    return Cell(value)


@dataclass(frozen=True)
class Sheet:
    name: str
    cells: dict = field(default_factory=dict)  # (row, col) -> Cell
    visibility: Visibility = Visibility.VISIBLE

    def __post_init__(self):
        object.__setattr__(self, "visibility", Visibility(self.visibility))
        for (row, col), cell in self.cells.items():
            if not in_bounds(row, col):
                raise WorkbookError(f"cell ({row}, {col}) outside sheet bounds on {self.name!r}")
            if cell.is_blank:
                raise WorkbookError(f"empty cell stored at ({row}, {col}) on {self.name!r}")

    def get(self, row: int, col: int) -> Cell | None:
        return self.cells.get((row, col))

    def sorted_cells(self) -> list[tuple[tuple[int, int], Cell]]:
        return sorted(self.cells.items())

    @property
    def bounds(self) -> tuple[int, int, int, int] | None:
        if not self.cells:
            return None
        rows = [r for r, _ in self.cells]
        cols = [c for _, c in self.cells]
        return min(rows), min(cols), max(rows), max(cols)


class ExternalSource(NamedTuple):
    name: str
    resolved: bool


@dataclass(frozen=True)
class Workbook:
    """An immutable workbook; edits go through :meth:`with_cells`."""

    sheets: tuple
    name: str = ""
    defined_names: dict = field(default_factory=dict)
    external_values: dict = field(default_factory=dict)  # ExternalAddr -> Value

    def __post_init__(self):
        object.__setattr__(self, "sheets", tuple(self.sheets))
        if not self.sheets:
            raise WorkbookError("a workbook needs at least one sheet")
        seen = set()
        for s in self.sheets:
            key = s.name.lower()
            if key in seen:
                raise WorkbookError(f"duplicate sheet name {s.name!r}")
            seen.add(key)

    @classmethod
    def from_mapping(cls, sheets: Mapping[str, Mapping[str, object]], name: str = "",
                     hidden: Mapping[str, str] | None = None, external_values=None) -> Workbook:
        """Build a workbook from ``{"Sheet": {"A1": 5, "A2": "=A1*2"}}``.

        Strings starting with ``=`` become formulas; ``(formula, cached)``
        tuples carry a cached value; anything else is a literal.
        """
        hidden = hidden or {}
        out = []
        for sheet_name, cells in sheets.items():
            content = {}
            for ref, raw in cells.items():
                row, col = parse_a1(ref)
                if isinstance(raw, Cell):
                    cell = raw
                elif isinstance(raw, tuple):
                    cell = Cell(raw[1], raw[0])
                elif isinstance(raw, str) and raw.startswith("="):
                    cell = Cell(None, raw)
                else:
                    cell = Cell(raw)
                if not cell.is_blank:
                    content[(row, col)] = cell
            out.append(Sheet(sheet_name, content, hidden.get(sheet_name, Visibility.VISIBLE)))
        return cls(tuple(out), name, external_values=dict(external_values or {}))

    def sheet(self, name: str) -> Sheet | None:
        return self._by_name.get(name.lower())

    def sheet_index(self, name: str) -> int:
        s = self.sheet(name)
        return self.sheets.index(s) if s is not None else len(self.sheets)

    @cached_property
    def _by_name(self) -> dict:
        return {s.name.lower(): s for s in self.sheets}

    def canonical_sheet_name(self, name: str) -> str:
        s = self.sheet(name)
        return s.name if s is not None else name

    def cell(self, addr: CellAddr) -> Cell | None:
        s = self.sheet(addr.sheet)
        return s.get(addr.row, addr.col) if s is not None else None

    def value_at(self, addr) -> Value:
        """The literal or cached value at ``addr`` (external cells use the stub table)."""
        if isinstance(addr, ExternalAddr):
            return self.external_values.get(addr)
        c = self.cell(addr)
        return c.value if c is not None else None

    def iter_cells(self) -> Iterator[tuple[CellAddr, Cell]]:
        for s in self.sheets:
            for (row, col), cell in s.sorted_cells():
                yield CellAddr(s.name, row, col), cell

    def formula_cells(self) -> Iterator[tuple[CellAddr, Cell]]:
        return ((a, c) for a, c in self.iter_cells() if c.is_formula)

    @cached_property
    def external_sources(self) -> list[ExternalSource]:
        """Distinct external workbooks referenced by any parseable formula."""
        books = {}
        for _, cell in self.formula_cells():
            try:
                ast = parse(cell.formula)
            except FormulaSyntaxError:
                continue
            for span in extract_refs(ast):
                if span.book is not None:
                    books.setdefault(span.book.lower(), span.book)
        stubbed = {a.book.lower() for a in self.external_values}
        return [ExternalSource(books[k], k in stubbed) for k in sorted(books)]

    def with_cells(self, updates: Mapping[CellAddr, Cell | None]) -> Workbook:
        """Copy with some cells replaced; None or blank cells are removed."""
        per_sheet: dict[str, dict] = {}
        for addr, cell in updates.items():
            per_sheet.setdefault(self.canonical_sheet_name(addr.sheet).lower(), {})[(addr.row, addr.col)] = cell
        sheets = []
        for s in self.sheets:
            changes = per_sheet.pop(s.name.lower(), None)
            if not changes:
                sheets.append(s)
                continue
            cells = dict(s.cells)
            for key, cell in changes.items():
                if cell is None or cell.is_blank:
                    cells.pop(key, None)
                else:
                    cells[key] = cell
            sheets.append(Sheet(s.name, cells, s.visibility))
        if per_sheet:
            raise WorkbookError(f"unknown sheet(s): {sorted(per_sheet)}")
        return Workbook(tuple(sheets), self.name, dict(self.defined_names), dict(self.external_values))

    def __eq__(self, other):
        if not isinstance(other, Workbook):
            return NotImplemented
        return (
            self.name == other.name
            and self.sheets == other.sheets
            and self.defined_names == other.defined_names
            and self.external_values.keys() == other.external_values.keys()
            and all(
                (v is None and other.external_values[k] is None) or same_value(v, other.external_values[k])
                for k, v in self.external_values.items()
            )
        )

    __hash__ = None


def is_error(v: Value) -> bool:
    return isinstance(v, ErrorCode)
