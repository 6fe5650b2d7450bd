"""Cell values, Excel error codes and locale-aware number handling.

A value is one of ``float``, ``str``, ``bool``, :class:`ErrorCode` or ``None``
(blank).  Numbers are 64-bit floats compared with an absolute tolerance of
``NUMBER_TOLERANCE``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Union

NUMBER_TOLERANCE = 1e-9


class ErrorCode(enum.Enum):
    DIV0 = "#DIV/0!"
    NA = "#N/A"
    NAME = "#NAME?"
    NULL = "#NULL!"
    NUM = "#NUM!"
    REF = "#REF!"
    VALUE = "#VALUE!"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> ErrorCode:
        key = text.strip().upper()
        if key in cls.__members__:
            return cls[key]
        try:
            return _ALIASES[key]
        except KeyError:
            raise ValueError(f"unknown error code {text!r}") from None


# Canonical and Dutch spellings; the last two are the mangled forms that show
# up when Dutch screenshots are OCR'd ("!" read as "1", "E" as "FE").
_ALIASES = {e.value: e for e in ErrorCode}
_ALIASES.update({
    "#DEEL/0!": ErrorCode.DIV0,
    "#N/B": ErrorCode.NA,
    "#NAAM?": ErrorCode.NAME,
    "#LEEG!": ErrorCode.NULL,
    "#GETAL!": ErrorCode.NUM,
    "#VERW!": ErrorCode.REF,
    "#WAARDE!": ErrorCode.VALUE,
    "#DEEL/01": ErrorCode.DIV0,
    "#VFERW1": ErrorCode.REF,
})

# Longest first so "#DIV/0!" is not cut short by a shorter alias prefix.
ERROR_SPELLINGS = sorted(_ALIASES, key=len, reverse=True)

Value = Union[float, str, bool, ErrorCode, None]


@dataclass(frozen=True)
class Locale:
    """Decimal and list separators used when reading formulas and values."""

    decimal: str = "."
    list_sep: str = ","

    def __post_init__(self):
        if (self.decimal, self.list_sep) not in ((".", ","), (",", ";")):
            raise ValueError(f"unsupported locale {self.decimal!r}/{self.list_sep!r}")


POINT = Locale(".", ",")
COMMA = Locale(",", ";")


def same_value(a: Value, b: Value) -> bool:
    """Type-aware equality (``True`` is not ``1.0``), numbers within tolerance."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return abs(a - b) <= NUMBER_TOLERANCE
    return type(a) is type(b) and a == b


def is_number(v: Value) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def format_number(x: float, locale: Locale = POINT) -> str:
    """Shortest text that reads back to exactly ``x``."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite number {x!r}")
    if x == int(x) and abs(x) < 1e15:
        text = str(int(x))
    else:
        text = repr(float(x))
    if locale.decimal == ",":
        text = text.replace(".", ",")
    return text


_LOCAL_NUMBER = {
    ".": re.compile(r"^[+-]?(\d{1,3}(,\d{3})+|\d+)(\.\d+)?$"),
    ",": re.compile(r"^[+-]?(\d{1,3}(\.\d{3})+|\d+)(,\d+)?$"),
}


def parse_local_number(text: str, locale: Locale = POINT) -> float | None:
    """Read a number written with ``locale`` separators, or None if it is not one.

    Thousands groups are accepted: under the comma locale ``"1.200"`` is 1200
    and ``"1,5"`` is 1.5.
    """
    t = text.strip()
    if not _LOCAL_NUMBER[locale.decimal].match(t):
        return None
    group = "," if locale.decimal == "." else "."
    t = t.replace(group, "")
    if locale.decimal == ",":
        t = t.replace(",", ".")
    return float(t)


def format_value(v: Value) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, ErrorCode):
        return v.value
    if is_number(v):
        return format_number(v)
    return str(v)


def value_to_json(v: Value):
    if isinstance(v, ErrorCode):
        return {"err": v.name}
    if is_number(v) and not isinstance(v, bool):
        if v == int(v) and abs(v) < 2**53:
            return int(v)
        return float(v)
    return v


def value_from_json(obj) -> Value:
    if isinstance(obj, dict):
        return ErrorCode.parse(obj["err"])
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, float)):
        if not math.isfinite(obj):
            raise ValueError("non-finite number")
        return float(obj)
    raise ValueError(f"not a cell value: {obj!r}")
