"""Findings tables, workbook graphs, sheet heatmaps and report bundles."""

from .bundle import PINNED_TIMESTAMP, ReportBundle, config_hash, make_meta
from .dot import emit_workbook_graph, pen_width
from .findings import COLUMNS, emit_findings, finding_from_dict, finding_to_dict, parse_findings
from .heatmap import emit_heatmap

__all__ = [
    "COLUMNS",
    "PINNED_TIMESTAMP",
    "ReportBundle",
    "config_hash",
    "emit_findings",
    "emit_heatmap",
    "emit_workbook_graph",
    "finding_from_dict",
    "finding_to_dict",
    "make_meta",
    "parse_findings",
    "pen_width",
]
