"""Risk detectors, findings, taxonomy mapping and sheet scoring."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from ..workbook import Workbook
from .detectors import (
    DETECTORS,
    Analysis,
    detect_circle_chain,
    detect_copy_paste,
    detect_empty_reference,
    detect_excel_errors,
    detect_fixed_numbers,
    detect_jealousy,
    detect_long_chain,
    detect_many_ref_groups,
    detect_multi_function,
    detect_unusual_ranges,
)
from .model import (
    AnalyzerConfig,
    DetectorKind,
    ErrorCategory,
    RiskDegree,
    RiskFinding,
    category_for,
    subtype_for,
)
from .scoring import GREEN, ORANGE, RED, cell_degrees, finding_sheets, sheet_colors, sheet_risk


def map_finding_to_category(f: RiskFinding) -> ErrorCategory:
    return category_for(f.kind, f.subtype)


def sort_key(wb: Workbook, f: RiskFinding) -> tuple:
    first = f.location[0]
    sheet_pos = len(wb.sheets) + 1 if first.book else wb.sheet_index(first.sheet)
    return (sheet_pos, first.top, first.left, f.kind.order, f.location_text, f.details)


def _consolidate(findings: list[RiskFinding]) -> list[RiskFinding]:
    # A formula with many reference groups almost always nests many functions
    # too; report it once, at the higher degree.
    many = {f.location for f in findings if f.kind is DetectorKind.MANY_REF_GROUPS}
    return [f for f in findings if not (f.kind is DetectorKind.MULTI_FUNCTION and f.location in many)]


def run_all(wb: Workbook, cfg: AnalyzerConfig | None = None, jobs: int | None = None,
            analysis: Analysis | None = None) -> list[RiskFinding]:
    """All detectors, consolidated and in canonical order.

    Order is sheet position, row, column, then detector kind, so the output
    does not depend on ``jobs`` or on detector scheduling.
    """
    cfg = cfg or AnalyzerConfig()
    ctx = (analysis or Analysis(wb, cfg)).prepare()
    detectors = list(DETECTORS.values())
    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(lambda d: d(wb, cfg, ctx), detectors))
    else:
        batches = [d(wb, cfg, ctx) for d in detectors]
    findings = _consolidate([f for batch in batches for f in batch])
    return sorted(findings, key=lambda f: sort_key(wb, f))


__all__ = [
    "Analysis",
    "AnalyzerConfig",
    "DETECTORS",
    "DetectorKind",
    "ErrorCategory",
    "GREEN",
    "ORANGE",
    "RED",
    "RiskDegree",
    "RiskFinding",
    "category_for",
    "cell_degrees",
    "detect_circle_chain",
    "detect_copy_paste",
    "detect_empty_reference",
    "detect_excel_errors",
    "detect_fixed_numbers",
    "detect_jealousy",
    "detect_long_chain",
    "detect_many_ref_groups",
    "detect_multi_function",
    "detect_unusual_ranges",
    "finding_sheets",
    "map_finding_to_category",
    "run_all",
    "sheet_colors",
    "sheet_risk",
    "sort_key",
    "subtype_for",
]
