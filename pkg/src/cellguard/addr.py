"""Cell addresses, A1 notation and sheet-name quoting."""

from __future__ import annotations

import re
from typing import NamedTuple, Union

MAX_ROW = 1_048_576
MAX_COL = 16_384

_A1_RE = re.compile(r"^\$?([A-Za-z]{1,3})\$?([0-9]+)$")
_PLAIN_SHEET_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def col_to_letters(col: int) -> str:
    if col < 1:
        raise ValueError(f"column must be >= 1, got {col}")
    out = ""
    while col:
        col, rem = divmod(col - 1, 26)
        out = chr(65 + rem) + out
    return out


def letters_to_col(letters: str) -> int:
    col = 0
    for ch in letters.upper():
        if not "A" <= ch <= "Z":
            raise ValueError(f"bad column letters {letters!r}")
        col = col * 26 + (ord(ch) - 64)
    return col


def in_bounds(row: int, col: int) -> bool:
    return 1 <= row <= MAX_ROW and 1 <= col <= MAX_COL


def parse_a1(text: str) -> tuple[int, int]:
    """Return ``(row, col)`` for an A1 reference such as ``"C12"`` or ``"$C$12"``."""
    m = _A1_RE.match(text.strip())
    if not m:
        raise ValueError(f"not an A1 reference: {text!r}")
    row, col = int(m.group(2)), letters_to_col(m.group(1))
    if not in_bounds(row, col):
        raise ValueError(f"reference out of bounds: {text!r}")
    return row, col


def format_a1(row: int, col: int) -> str:
    return f"{col_to_letters(col)}{row}"


def _looks_like_cell(name: str) -> bool:
    m = _A1_RE.match(name)
    if not m:
        return False
    try:
        return in_bounds(int(m.group(2)), letters_to_col(m.group(1)))
    except ValueError:
        return False


def sheet_prefix(sheet: str | None, book: str | None = None) -> str:
    """Sheet qualifier including the trailing ``!``; empty when ``sheet`` is None."""
    if sheet is None:
        return ""
    body = f"[{book}]{sheet}" if book else sheet
    plain = (
        _PLAIN_SHEET_RE.match(sheet)
        and not _looks_like_cell(sheet)
        and sheet.upper() not in ("TRUE", "FALSE")
        and (book is None or re.match(r"^[A-Za-z0-9_.\-]+$", book))
    )
    if plain:
        return body + "!"
    return "'" + body.replace("'", "''") + "'!"


class CellAddr(NamedTuple):
    sheet: str
    row: int
    col: int

    def __str__(self) -> str:
        return sheet_prefix(self.sheet) + format_a1(self.row, self.col)


class ExternalAddr(NamedTuple):
    book: str
    sheet: str
    row: int
    col: int

    def __str__(self) -> str:
        return sheet_prefix(self.sheet, self.book) + format_a1(self.row, self.col)


class CellRange(NamedTuple):
    """Inclusive rectangle on one sheet; also used as a finding location."""

    sheet: str
    top: int
    left: int
    bottom: int
    right: int
    book: str | None = None

    @classmethod
    def single(cls, addr: CellAddr | ExternalAddr) -> CellRange:
        if isinstance(addr, ExternalAddr):
            return cls(addr.sheet, addr.row, addr.col, addr.row, addr.col, addr.book)
        return cls(addr.sheet, addr.row, addr.col, addr.row, addr.col)

    @property
    def size(self) -> int:
        return (self.bottom - self.top + 1) * (self.right - self.left + 1)

    def contains(self, addr: CellAddr | ExternalAddr) -> bool:
        book = addr.book if isinstance(addr, ExternalAddr) else None
        if (book or None) != (self.book or None):
            return False
        return (
            addr.sheet.lower() == self.sheet.lower()
            and self.top <= addr.row <= self.bottom
            and self.left <= addr.col <= self.right
        )

    def cells(self):
        for r in range(self.top, self.bottom + 1):
            for c in range(self.left, self.right + 1):
                if self.book:
                    yield ExternalAddr(self.book, self.sheet, r, c)
                else:
                    yield CellAddr(self.sheet, r, c)

    def __str__(self) -> str:
        a = format_a1(self.top, self.left)
        if (self.top, self.left) != (self.bottom, self.right):
            a += ":" + format_a1(self.bottom, self.right)
        return sheet_prefix(self.sheet, self.book) + a


Location = tuple[CellRange, ...]
Node = Union[CellAddr, ExternalAddr, "RangeNode"]


class RangeNode(NamedTuple):
    """A range too large to expand, kept as a single graph node."""

    sheet: str
    top: int
    left: int
    bottom: int
    right: int
    book: str | None = None

    def __str__(self) -> str:
        return str(CellRange(*self))


def node_key(node) -> tuple:
    """Total order over graph nodes: internal cells first, then externals."""
    if isinstance(node, CellAddr):
        return (0, "", node.sheet.lower(), node.sheet, node.row, node.col, 0, 0)
    if isinstance(node, ExternalAddr):
        return (1, node.book.lower(), node.sheet.lower(), node.sheet, node.row, node.col, 0, 0)
    return (2, (node.book or "").lower(), node.sheet.lower(), node.sheet,
            node.top, node.left, node.bottom, node.right)


_REF_RE = re.compile(
    r"""^(?:
        '(?P<quoted>(?:[^']|'')+)'!
      | (?P<plain>(?:\[[^\]]+\])?[^'!:\[\]]+)!
    )?
    (?P<a>\$?[A-Za-z]{1,3}\$?[0-9]+)(?::(?P<b>\$?[A-Za-z]{1,3}\$?[0-9]+))?$""",
    re.VERBOSE,
)


def _split_book(qualifier: str) -> tuple[str | None, str]:
    if qualifier.startswith("["):
        end = qualifier.index("]")
        return qualifier[1:end], qualifier[end + 1:]
    return None, qualifier


def parse_range_text(text: str, default_sheet: str | None = None) -> CellRange:
    """Parse ``Sheet!A1``, ``'Sao Paolo'!C12:C18`` or ``'[Book]S'!A1`` into a CellRange."""
    m = _REF_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a cell or range reference: {text!r}")
    qual = m.group("quoted")
    if qual is not None:
        qual = qual.replace("''", "'")
    else:
        qual = m.group("plain")
    book, sheet = (None, default_sheet) if qual is None else _split_book(qual)
    if sheet is None:
        raise ValueError(f"reference lacks a sheet: {text!r}")
    r1, c1 = parse_a1(m.group("a"))
    r2, c2 = parse_a1(m.group("b")) if m.group("b") else (r1, c1)
    return CellRange(sheet, min(r1, r2), min(c1, c2), max(r1, r2), max(c1, c2), book)


def format_location(loc: Location) -> str:
    return ", ".join(str(r) for r in loc)


def parse_location(text: str) -> Location:
    parts, buf, quoted = [], "", False
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "'":
            if quoted and text[i + 1:i + 2] == "'":
                buf += "''"
                i += 2
                continue
            quoted = not quoted
        if not quoted and text.startswith(", ", i):
            parts.append(buf)
            buf = ""
            i += 2
            continue
        buf += ch
        i += 1
    if buf:
        parts.append(buf)
    return tuple(parse_range_text(p) for p in parts)


def location_contains(loc: Location, addr: CellAddr | ExternalAddr) -> bool:
    return any(r.contains(addr) for r in loc)
