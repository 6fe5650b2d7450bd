"""Recursive-descent parser for the formula subset.

Precedence, loosest first::

    comparisons  = <> < > <= >=
    &
    + -
    * /
    ^            (left-associative)
    %            (postfix)
    - +          (prefix)

Every level is left-associative.
"""

from __future__ import annotations

from ..values import POINT, Locale
from .ast import (
    COMPARISON_OPS,
    Binary,
    FormulaAst,
    Function,
    Literal,
    Paren,
    Range,
    Ref,
    Unary,
)
from .lexer import EmptyFormula, FormulaSyntaxError, Lexer, Token, UnbalancedParens

_BINARY_LEVELS = [
    COMPARISON_OPS,
    ("&",),
    ("+", "-"),
    ("*", "/"),
    ("^",),
]


class _Parser:
    def __init__(self, text: str, locale: Locale):
        self.text = text
        self.tokens = Lexer(text, locale).tokens()
        self.i = 0
        self.depth = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, expected: str):
        t = self.tok
        if t.kind == "RPAREN" and self.depth == 0:
            raise UnbalancedParens(t.offset, "a '(' matching this ')'", self.text)
        if t.kind == "END" and self.depth > 0:
            raise UnbalancedParens(t.offset, "')'", self.text)
        raise FormulaSyntaxError(t.offset, expected, self.text)

    def parse(self) -> FormulaAst:
        if self.tok.kind == "END":
            raise EmptyFormula(self.text)
        node = self.expr()
        if self.tok.kind != "END":
            self.fail("end of formula")
        return node

    def expr(self, lvl: int = 0) -> FormulaAst:
        if lvl == len(_BINARY_LEVELS):
            return self.percent()
        ops = _BINARY_LEVELS[lvl]
        left = self.expr(lvl + 1)
        while self.tok.kind == "OP" and self.tok.value in ops:
            op = self.advance().value
            left = Binary(op, left, self.expr(lvl + 1))
        return left

    def percent(self) -> FormulaAst:
        node = self.unary()
        while self.tok.kind == "OP" and self.tok.value == "%":
            self.advance()
            node = Unary("%", node)
        return node

    def unary(self) -> FormulaAst:
        if self.tok.kind == "OP" and self.tok.value in ("-", "+"):
            op = self.advance().value
            return Unary(op, self.unary())
        return self.primary()

    def primary(self) -> FormulaAst:
        t = self.tok
        if t.kind in ("NUM", "STR", "BOOL", "ERR"):
            self.advance()
            return Literal(t.value)
        if t.kind == "REF":
            self.advance()
            return Range(t.value) if t.value.is_range else Ref(t.value)
        if t.kind == "LPAREN":
            self.advance()
            self.depth += 1
            inner = self.expr()
            if self.tok.kind != "RPAREN":
                self.fail("')'")
            self.advance()
            self.depth -= 1
            return Paren(inner)
        if t.kind == "FUNC":
            return self.call()
        self.fail("an operand")

    def call(self) -> FormulaAst:
        name = self.advance().value
        self.depth += 1
        args = []
        if self.tok.kind == "RPAREN":
            self.advance()
            self.depth -= 1
            return Function(name, ())
        while True:
            if self.tok.kind in ("SEP", "RPAREN"):
                args.append(Literal(None))
            else:
                args.append(self.expr())
            if self.tok.kind == "SEP":
                self.advance()
                continue
            if self.tok.kind == "RPAREN":
                self.advance()
                self.depth -= 1
                return Function(name, tuple(args))
            self.fail("',' or ')' in argument list")


def parse(text: str, locale: Locale = POINT) -> FormulaAst:
    """Parse formula ``text`` (which must start with ``=``) into an AST."""
    if not text.startswith("="):
        raise FormulaSyntaxError(0, "'=' at the start of the formula", text)
    try:
        return _Parser(text[1:], locale).parse()
    except FormulaSyntaxError as exc:
        # Report offsets against the full text, including the leading "=".
        exc.offset += 1
        exc.text = text
        exc.args = (f"at offset {exc.offset}: expected {exc.expected}",)
        raise
