"""A small evaluator for keeping fixture cached values honest.

Supports literals, references, ranges (inside SUM/AVERAGE), arithmetic,
``%``, ``&``, comparisons and the functions SUM, AVERAGE and IF.  Analysis
never calls this: audited files are judged on their cached values.
"""

from __future__ import annotations

import math
import operator

from ..addr import CellAddr, ExternalAddr
from ..formula import Binary, FormulaSyntaxError, Function, Literal, Paren, Range, Ref, Unary, parse
from ..formula.ast import RefSpan
from ..values import ErrorCode, Value, format_value, is_number
from .model import Workbook


class EvaluationError(ValueError):
    pass


class UnsupportedFunction(EvaluationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"function {name} is not supported by the evaluator")


class CycleDetected(EvaluationError):
    def __init__(self, path: list):
        self.path = list(path)
        super().__init__("circular reference: " + " -> ".join(str(a) for a in self.path))


SUPPORTED_FUNCTIONS = frozenset({"SUM", "AVERAGE", "IF"})


class _ErrorValue(Exception):
    """Internal short-circuit carrying an Excel error through the recursion."""

    def __init__(self, code: ErrorCode):
        self.code = code


def _number(v: Value) -> float:
    """Scalar coercion used by arithmetic: blank is 0, TRUE is 1, numeric text is read."""
    if v is None:
        return 0.0
    if isinstance(v, ErrorCode):
        raise _ErrorValue(v)
    if isinstance(v, bool):
        return 1.0 if v else 0.0
    if is_number(v):
        return float(v)
    try:
        return float(v.strip())
    except ValueError:
        raise _ErrorValue(ErrorCode.VALUE) from None


def _finite(x: float) -> float:
    if not math.isfinite(x):
        raise _ErrorValue(ErrorCode.NUM)
    return x


def _power(a: float, b: float) -> float:
    if a == 0 and b < 0:
        raise _ErrorValue(ErrorCode.DIV0)
    if a < 0 and b != int(b):
        raise _ErrorValue(ErrorCode.NUM)
    try:
        return _finite(a ** b)
    except OverflowError:
        raise _ErrorValue(ErrorCode.NUM) from None


def _divide(a: float, b: float) -> float:
    if b == 0:
        raise _ErrorValue(ErrorCode.DIV0)
    return a / b


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": _divide, "^": _power}


def _type_rank(v: Value) -> int:
    # Excel orders numbers < text < logicals when comparing mixed types.
    if isinstance(v, bool):
        return 2
    if isinstance(v, str):
        return 1
    return 0


def _compare(op: str, a: Value, b: Value) -> bool:
    for v in (a, b):
        if isinstance(v, ErrorCode):
            raise _ErrorValue(v)
    # A blank takes the type of the other side.
    if a is None:
        a = "" if isinstance(b, str) else (False if isinstance(b, bool) else 0.0)
    if b is None:
        b = "" if isinstance(a, str) else (False if isinstance(a, bool) else 0.0)
    ra, rb = _type_rank(a), _type_rank(b)
    if ra != rb:
        key_a, key_b = ra, rb
    elif isinstance(a, str):
        key_a, key_b = a.lower(), b.lower()
    else:
        key_a, key_b = float(a), float(b)
    return {
        "=": key_a == key_b,
        "<>": key_a != key_b,
        "<": key_a < key_b,
        ">": key_a > key_b,
        "<=": key_a <= key_b,
        ">=": key_a >= key_b,
    }[op]


def _truth(v: Value) -> bool:
    if isinstance(v, ErrorCode):
        raise _ErrorValue(v)
    if isinstance(v, str):
        if v.upper() in ("TRUE", "FALSE"):
            return v.upper() == "TRUE"
        raise _ErrorValue(ErrorCode.VALUE)
    return bool(_number(v))


class _Evaluator:
    def __init__(self, wb: Workbook, dirty):
        self.wb = wb
        self.dirty = None if dirty is None else {self._key(a) for a in dirty}
        self.memo: dict = {}
        self.stack: list = []

    @staticmethod
    def _key(addr: CellAddr):
        return (addr.sheet.lower(), addr.row, addr.col)

    def cell_value(self, addr) -> Value:
        if isinstance(addr, ExternalAddr):
            return self.wb.value_at(addr)
        cell = self.wb.cell(addr)
        if cell is None:
            return None
        if not cell.is_formula:
            return cell.value
        key = self._key(addr)
        if self.dirty is not None and key not in self.dirty:
            return cell.value
        if key in self.memo:
            return self.memo[key]
        if key in {self._key(a) for a in self.stack}:
            start = [self._key(a) for a in self.stack].index(key)
            raise CycleDetected(self.stack[start:] + [addr])
        self.stack.append(addr)
        try:
            value = self.formula_value(cell.formula, addr.sheet)
        finally:
            self.stack.pop()
        self.memo[key] = value
        return value

    def formula_value(self, text: str, home: str) -> Value:
        ast = parse(text)
        try:
            value = self.scalar(ast, home)
        except _ErrorValue as e:
            return e.code
        # A formula that lands on a blank cell shows 0.
        return 0.0 if value is None else value

    def addr_of(self, span: RefSpan, home: str, row: int, col: int):
        sheet = span.sheet or home
        if span.book is not None:
            return ExternalAddr(span.book, sheet, row, col)
        if self.wb.sheet(sheet) is None:
            raise _ErrorValue(ErrorCode.REF)
        return CellAddr(self.wb.canonical_sheet_name(sheet), row, col)

    def range_values(self, span: RefSpan, home: str) -> list:
        top, left, bottom, right = span.bounds
        return [
            self.cell_value(self.addr_of(span, home, r, c))
            for r in range(top, bottom + 1)
            for c in range(left, right + 1)
        ]

    def numbers(self, args, home: str) -> list[float]:
        """Numeric arguments as SUM/AVERAGE see them."""
        out = []
        for a in args:
            if isinstance(a, (Range, Ref)):
                # Cells reached by reference: only true numbers count, errors propagate.
                for v in self.range_values(a.span, home):
                    if isinstance(v, ErrorCode):
                        raise _ErrorValue(v)
                    if is_number(v):
                        out.append(float(v))
            elif isinstance(a, Literal) and a.value is None:
                continue
            else:
                out.append(_number(self.scalar(a, home)))
        return out

    def scalar(self, n, home: str) -> Value:
        if isinstance(n, Literal):
            if isinstance(n.value, ErrorCode):
                raise _ErrorValue(n.value)
            return n.value
        if isinstance(n, Ref):
            span = n.span
            v = self.cell_value(self.addr_of(span, home, span.start.row, span.start.col))
            if isinstance(v, ErrorCode):
                raise _ErrorValue(v)
            return v
        if isinstance(n, Range):
            # A bare range outside an aggregate is not a scalar.
            raise _ErrorValue(ErrorCode.VALUE)
        if isinstance(n, Paren):
            return self.scalar(n.child, home)
        if isinstance(n, Unary):
            x = _number(self.scalar(n.child, home))
            if n.op == "%":
                return x / 100
            return -x if n.op == "-" else x
        if isinstance(n, Binary):
            left = self.scalar(n.left, home)
            right = self.scalar(n.right, home)
            if n.op in _ARITH:
                return _finite(_ARITH[n.op](_number(left), _number(right)))
            if n.op == "&":
                return format_value(left) + format_value(right)
            return _compare(n.op, left, right)
        if isinstance(n, Function):
            return self.call(n, home)
        raise TypeError(f"not a formula node: {n!r}")

    def call(self, fn: Function, home: str) -> Value:
        if fn.name not in SUPPORTED_FUNCTIONS:
            raise UnsupportedFunction(fn.name)
        if fn.name == "SUM":
            return _finite(math.fsum(self.numbers(fn.args, home)))
        if fn.name == "AVERAGE":
            xs = self.numbers(fn.args, home)
            if not xs:
                raise _ErrorValue(ErrorCode.DIV0)
            return _finite(math.fsum(xs) / len(xs))
        if not 2 <= len(fn.args) <= 3:
            raise _ErrorValue(ErrorCode.VALUE)
        if _truth(self.scalar(fn.args[0], home)):
            branch = fn.args[1]
        elif len(fn.args) == 3:
            branch = fn.args[2]
        else:
            return False
        if isinstance(branch, Literal) and branch.value is None:
            return 0.0
        return self.scalar(branch, home)


def evaluate_cell(wb: Workbook, addr: CellAddr, dirty=None) -> Value:
    """Compute the value of the cell at ``addr``.

    Precedent formulas are recomputed recursively.  When ``dirty`` is given,
    only cells in it are recomputed and every other formula contributes its
    cached value, which is how injected workbooks get refreshed.
    """
    if wb.sheet(addr.sheet) is None:
        raise KeyError(f"no sheet named {addr.sheet!r}")
    addr = CellAddr(wb.canonical_sheet_name(addr.sheet), addr.row, addr.col)
    ev = _Evaluator(wb, dirty)
    if dirty is not None:
        ev.dirty.add(ev._key(addr))
    return ev.cell_value(addr)


def refresh_values(wb: Workbook, addrs) -> dict:
    """Recompute the formula cells in ``addrs``, trusting every other cached value.

    Returns ``{addr: value}``; cells the evaluator cannot handle (unsupported
    functions, cycles, unparseable text) map to None, i.e. a stale cache.
    """
    addrs = [CellAddr(wb.canonical_sheet_name(a.sheet), a.row, a.col) for a in addrs]
    ev = _Evaluator(wb, addrs)
    out = {}
    for addr in addrs:
        try:
            out[addr] = ev.cell_value(addr)
        except (EvaluationError, FormulaSyntaxError):
            ev.stack.clear()
            out[addr] = None
    return out
