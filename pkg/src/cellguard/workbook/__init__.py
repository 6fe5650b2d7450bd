"""Workbook object model, ingestion (XLSX and JSON interchange) and evaluator."""

from __future__ import annotations

from pathlib import Path

from ..values import POINT, Locale
from .evaluator import CycleDetected, EvaluationError, UnsupportedFunction, evaluate_cell
from .interchange import SchemaViolation, load_interchange, save_interchange, workbook_from_dict, workbook_to_dict
from .model import Cell, ExternalSource, Sheet, Visibility, Workbook, WorkbookError, formula, is_error, literal
from .xlsx import MalformedWorkbookXml, NotAnArchive, UnsupportedFeature, XlsxError, load_xlsx


def load_workbook(path, locale: Locale = POINT) -> Workbook:
    """Load ``path`` as interchange JSON (``.json``) or XLSX (anything else)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        return load_interchange(path.read_text(encoding="utf-8"), locale)
    return load_xlsx(path)


__all__ = [
    "Cell",
    "CycleDetected",
    "EvaluationError",
    "ExternalSource",
    "MalformedWorkbookXml",
    "NotAnArchive",
    "SchemaViolation",
    "Sheet",
    "UnsupportedFeature",
    "UnsupportedFunction",
    "Visibility",
    "Workbook",
    "WorkbookError",
    "XlsxError",
    "evaluate_cell",
    "formula",
    "is_error",
    "literal",
    "load_interchange",
    "load_workbook",
    "load_xlsx",
    "save_interchange",
    "workbook_from_dict",
    "workbook_to_dict",
]
