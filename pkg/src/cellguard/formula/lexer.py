"""Tokenizer for the supported Excel formula subset."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..addr import MAX_COL, MAX_ROW, letters_to_col
from ..values import ERROR_SPELLINGS, POINT, ErrorCode, Locale
from .ast import RefPoint, RefSpan


class FormulaSyntaxError(ValueError):
    def __init__(self, offset: int, expected: str, text: str = ""):
        self.offset = offset
        self.expected = expected
        self.text = text
        super().__init__(f"at offset {offset}: expected {expected}")


class UnbalancedParens(FormulaSyntaxError):
    pass


class EmptyFormula(FormulaSyntaxError):
    def __init__(self, text: str = ""):
        super().__init__(0, "an expression after '='", text)


@dataclass(frozen=True)
class Token:
    kind: str  # NUM STR BOOL ERR REF FUNC OP LPAREN RPAREN SEP END
    value: object
    offset: int


_CELL = r"(\$?)([A-Za-z]{1,3})(\$?)([0-9]+)"
_CELL_RE = re.compile(_CELL)
_NUM_RE = {
    ".": re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?"),
    ",": re.compile(r"(\d+(,\d*)?|,\d+)([eE][+-]?\d+)?"),
}
_IDENT_RE = re.compile(r"[A-Za-z_\\][A-Za-z0-9_.]*")
_PLAIN_SHEET_RE = re.compile(r"(\[[^\]]+\])?([A-Za-z0-9_.]+)!")
_OPS = ("<>", "<=", ">=", "+", "-", "*", "/", "^", "&", "=", "<", ">", "%")


def _point(m: re.Match) -> RefPoint | None:
    col, row = letters_to_col(m.group(2)), int(m.group(4))
    if not (1 <= col <= MAX_COL and 1 <= row <= MAX_ROW):
        return None
    return RefPoint(col, row, bool(m.group(1)), bool(m.group(3)))


class Lexer:
    def __init__(self, text: str, locale: Locale = POINT):
        self.text = text
        self.locale = locale
        self.pos = 0

    def error(self, expected: str, offset: int | None = None):
        raise FormulaSyntaxError(self.pos if offset is None else offset, expected, self.text)

    def tokens(self) -> list[Token]:
        out = []
        while True:
            tok = self.next()
            out.append(tok)
            if tok.kind == "END":
                return out

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def next(self) -> Token:
        self._skip_ws()
        text, start = self.text, self.pos
        if start >= len(text):
            return Token("END", None, start)
        ch = text[start]
        if ch == '"':
            return self._string()
        if ch == "(":
            self.pos += 1
            return Token("LPAREN", "(", start)
        if ch == ")":
            self.pos += 1
            return Token("RPAREN", ")", start)
        if ch == self.locale.list_sep:
            self.pos += 1
            return Token("SEP", ch, start)
        if ch == "#":
            for spelling in ERROR_SPELLINGS:
                if text.upper().startswith(spelling, start):
                    self.pos += len(spelling)
                    return Token("ERR", ErrorCode.parse(spelling), start)
            self.error("an error literal")
        m = _NUM_RE[self.locale.decimal].match(text, start)
        if m:
            self.pos = m.end()
            return Token("NUM", float(m.group(0).replace(",", ".")), start)
        for op in _OPS:
            if text.startswith(op, start):
                self.pos += len(op)
                return Token("OP", op, start)
        if ch == "'" or ch == "[":
            return self._qualified_ref()
        if ch == "$":
            return self._ref(None, None, start)
        m = _IDENT_RE.match(text, start)
        if m:
            return self._identifier(m)
        self.error("an operand or operator")

    def _string(self) -> Token:
        start = self.pos
        i = start + 1
        buf = []
        while i < len(self.text):
            c = self.text[i]
            if c == '"':
                if self.text[i + 1:i + 2] == '"':
                    buf.append('"')
                    i += 2
                    continue
                self.pos = i + 1
                return Token("STR", "".join(buf), start)
            buf.append(c)
            i += 1
        self.error("closing quote", start)

    def _identifier(self, m: re.Match) -> Token:
        start = self.pos
        name = m.group(0)
        after = m.end()
        j = after
        while j < len(self.text) and self.text[j] == " ":
            j += 1
        if j < len(self.text) and self.text[j] == "(":
            self.pos = j + 1
            return Token("FUNC", name.upper(), start)
        sheet_m = _PLAIN_SHEET_RE.match(self.text, start)
        if sheet_m:
            self.pos = sheet_m.end()
            return self._ref(sheet_m.group(2), None, start)
        cell_m = _CELL_RE.match(self.text, start)
        if cell_m and not self._ident_continues(cell_m.end()):
            after = cell_m.end()
            if after < len(self.text) and self.text[after] == ":":
                # "Sheet1:Sheet3!A1" style 3-D reference
                three_d = re.compile(r":[A-Za-z0-9_.]+!").match(self.text, after)
                if three_d:
                    self.error("a reference (3-D references are not supported)", start)
            return self._ref(None, None, start)
        if name.upper() in ("TRUE", "FALSE"):
            self.pos = after
            return Token("BOOL", name.upper() == "TRUE", start)
        if after < len(self.text) and self.text[after] == ":":
            self.error("a reference (3-D references are not supported)", start)
        self.error(f"a function, reference or boolean (unknown name {name!r})", start)

    def _qualified_ref(self) -> Token:
        start = self.pos
        text = self.text
        if text[start] == "'":
            i = start + 1
            buf = []
            while i < len(text):
                if text[i] == "'":
                    if text[i + 1:i + 2] == "'":
                        buf.append("'")
                        i += 2
                        continue
                    break
                buf.append(text[i])
                i += 1
            if i >= len(text) or text[i + 1:i + 2] != "!":
                self.error("quoted sheet name followed by '!'", start)
            qual = "".join(buf)
            self.pos = i + 2
        else:
            m = _PLAIN_SHEET_RE.match(text, start)
            if not m:
                self.error("[Book]Sheet! qualifier", start)
            qual = m.group(0)[:-1]
            self.pos = m.end()
        book = None
        if qual.startswith("["):
            end = qual.find("]")
            if end < 0:
                self.error("']' closing the workbook name", start)
            book, qual = qual[1:end], qual[end + 1:]
        if not qual:
            self.error("a sheet name", start)
        if ":" in qual and book is None:
            self.error("a reference (3-D references are not supported)", start)
        return self._ref(qual, book, start)

    def _ref(self, sheet: str | None, book: str | None, start: int) -> Token:
        m = _CELL_RE.match(self.text, self.pos)
        p1 = _point(m) if m else None
        if p1 is None or self._ident_continues(m.end()):
            self.error("a cell reference", self.pos)
        self.pos = m.end()
        p2 = None
        if self.text.startswith(":", self.pos):
            m2 = _CELL_RE.match(self.text, self.pos + 1)
            p2 = _point(m2) if m2 else None
            if p2 is None or self._ident_continues(m2.end()):
                self.error("a cell reference after ':'", self.pos + 1)
            self.pos = m2.end()
        return Token("REF", RefSpan(sheet, book, p1, p2), start)

    def _ident_continues(self, pos: int) -> bool:
        return pos < len(self.text) and (self.text[pos].isalnum() or self.text[pos] in "_.!(")
