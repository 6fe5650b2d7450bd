"""JSON interchange format: the test-friendly twin of XLSX ingestion.

::

    {"name": "Book",
     "sheets": [{"name": "S", "visibility": "hidden",
                 "cells": {"A1": {"v": 5}, "A2": {"f": "=A1*2", "v": 10}}}],
     "external_values": {"[Budget.xlsx]Q1!A1": 3},
     "defined_names": {"Rate": "S!$A$1"}}

Values are numbers, strings, booleans or ``{"err": "DIV0"}``.
"""

from __future__ import annotations

import json

import jsonschema

from ..addr import ExternalAddr, format_a1, parse_a1, parse_range_text
from ..formula import FormulaSyntaxError, parse, print_formula
from ..values import POINT, Locale, parse_local_number, value_from_json, value_to_json
from .model import Cell, Sheet, Visibility, Workbook, WorkbookError


class SchemaViolation(ValueError):
    def __init__(self, pointer: str, detail: str):
        self.pointer = pointer
        self.detail = detail
        super().__init__(f"{pointer or '/'}: {detail}")


_VALUE = {
    "oneOf": [
        {"type": ["number", "string", "boolean", "null"]},
        {"type": "object", "properties": {"err": {"type": "string"}},
         "required": ["err"], "additionalProperties": False},
    ]
}

SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "sheets": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "visibility": {"enum": [v.value for v in Visibility]},
                    "cells": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "properties": {
                                "f": {"type": "string", "pattern": "^="},
                                "v": _VALUE,
                            },
                            "minProperties": 1,
                            "additionalProperties": False,
                        },
                    },
                },
                "required": ["name", "cells"],
                "additionalProperties": False,
            },
        },
        "external_values": {"type": "object", "additionalProperties": _VALUE},
        "defined_names": {"type": "object", "additionalProperties": {"type": "string"}},
    },
    "required": ["sheets"],
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _canonical_formula(text: str, locale: Locale) -> str:
    if locale == POINT:
        return text
    try:
        return print_formula(parse(text, locale))
    except FormulaSyntaxError:
        return text


def _read_value(raw, locale: Locale):
    if isinstance(raw, str) and locale != POINT:
        number = parse_local_number(raw, locale)
        if number is not None:
            return number
    return value_from_json(raw)


def workbook_from_dict(doc: dict, locale: Locale = POINT) -> Workbook:
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SchemaViolation(_pointer(e.absolute_path), e.message)
    sheets = []
    seen = set()
    for i, s in enumerate(doc["sheets"]):
        if s["name"].lower() in seen:
            raise SchemaViolation(f"/sheets/{i}/name", f"duplicate sheet name {s['name']!r}")
        seen.add(s["name"].lower())
        cells = {}
        for key, entry in s["cells"].items():
            ptr = f"/sheets/{i}/cells/{key}"
            try:
                row, col = parse_a1(key)
                if (row, col) in cells:
                    raise ValueError(f"cell {key} given twice")
                value = _read_value(entry.get("v"), locale)
            except ValueError as exc:
                raise SchemaViolation(ptr, str(exc)) from None
            if "f" in entry:
                cell = Cell(value, _canonical_formula(entry["f"], locale))
            elif value is None:
                raise SchemaViolation(ptr, "empty cells must be omitted")
            else:
                cell = Cell(value)
            cells[(row, col)] = cell
        sheets.append(Sheet(s["name"], cells, Visibility(s.get("visibility", "visible"))))
    external = {}
    for key, raw in doc.get("external_values", {}).items():
        try:
            rng = parse_range_text(key)
            if rng.book is None or rng.size != 1:
                raise ValueError("expected a single external cell like [Book]Sheet!A1")
            external[ExternalAddr(rng.book, rng.sheet, rng.top, rng.left)] = _read_value(raw, locale)
        except ValueError as exc:
            raise SchemaViolation(f"/external_values/{key}", str(exc)) from None
    try:
        return Workbook(tuple(sheets), doc.get("name", ""), dict(doc.get("defined_names", {})), external)
    except WorkbookError as exc:
        raise SchemaViolation("", str(exc)) from None


def load_interchange(doc: str, locale: Locale = POINT) -> Workbook:
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("", f"not JSON: {exc}") from None
    return workbook_from_dict(data, locale)


def workbook_to_dict(wb: Workbook) -> dict:
    doc = {}
    if wb.name:
        doc["name"] = wb.name
    sheets = []
    for s in wb.sheets:
        entry = {"name": s.name}
        if s.visibility is not Visibility.VISIBLE:
            entry["visibility"] = s.visibility.value
        cells = {}
        for (row, col), cell in s.sorted_cells():
            out = {}
            if cell.formula is not None:
                out["f"] = cell.formula
            if cell.value is not None:
                out["v"] = value_to_json(cell.value)
            cells[format_a1(row, col)] = out
        entry["cells"] = cells
        sheets.append(entry)
    doc["sheets"] = sheets
    if wb.external_values:
        doc["external_values"] = {
            str(a): value_to_json(v)
            for a, v in sorted(wb.external_values.items(), key=lambda kv: (kv[0].book, kv[0].sheet, kv[0].row, kv[0].col))
        }
    if wb.defined_names:
        doc["defined_names"] = dict(sorted(wb.defined_names.items()))
    return doc


def save_interchange(wb: Workbook) -> str:
    return json.dumps(workbook_to_dict(wb), indent=2, ensure_ascii=False) + "\n"
