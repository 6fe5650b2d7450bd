from __future__ import annotations

from ..addr import CellAddr
from ..workbook import Sheet
from .model import AnalyzerConfig, RiskDegree, RiskFinding

GREEN = "green"
ORANGE = "orange"
RED = "red"


def finding_sheets(f: RiskFinding) -> set[str]:
    """Lower-cased names of the workbook sheets a finding touches."""
    return {r.sheet.lower() for r in f.location if not r.book}


def sheet_risk(findings, sheet: Sheet | str, cfg: AnalyzerConfig = AnalyzerConfig(),
               cell_count: int | None = None) -> tuple[float, str]:
    """``(score, color)`` for one sheet.

    The score is the sum of degree weights (1/3/9) over the sheet's findings
    divided by its non-empty cell count.  Any High finding makes the sheet
    red and any Medium at least orange, whatever the score.
    """
    name = sheet if isinstance(sheet, str) else sheet.name
    if cell_count is None:
        cell_count = 0 if isinstance(sheet, str) else len(sheet.cells)
    mine = [f for f in findings if name.lower() in finding_sheets(f)]
    score = sum(f.degree.weight for f in mine) / max(1, cell_count)
    top = max((f.degree for f in mine), default=None)
    if top is RiskDegree.HIGH or score >= cfg.sheet_red_score:
        return score, RED
    if top is RiskDegree.MEDIUM or score >= cfg.sheet_orange_score:
        return score, ORANGE
    return score, GREEN


def sheet_colors(wb, findings, cfg: AnalyzerConfig = AnalyzerConfig()) -> dict[str, str]:
    return {s.name: sheet_risk(findings, s, cfg)[1] for s in wb.sheets}


def cell_degrees(findings, sheet_name: str) -> dict[tuple[int, int], RiskDegree]:
    """Highest degree of any finding located at each cell of a sheet."""
    out = {}
    for f in findings:
        for r in f.location:
            if r.book or r.sheet.lower() != sheet_name.lower():
                continue
            for a in r.cells():
                assert isinstance(a, CellAddr)
                key = (a.row, a.col)
                if key not in out or f.degree > out[key]:
                    out[key] = f.degree
    return out
