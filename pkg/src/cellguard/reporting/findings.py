"""Findings tables as JSON, CSV and HTML, and the JSON reader."""

from __future__ import annotations

import csv
import html
import io
import json

from ..addr import parse_location
from ..risk.model import DetectorKind, ErrorCategory, RiskDegree, RiskFinding, subtype_for
from ..values import format_value, value_from_json, value_to_json

COLUMNS = [
    "Risk finding",
    "Risk degree",
    "Location",
    "Details",
    "Current value",
    "Refactoring suggestion",
    "Category",
]
JSON_KEYS = ["kind", "degree", "location", "details", "current_value", "suggestion", "category"]


def finding_to_dict(f: RiskFinding) -> dict:
    return {
        "kind": f.kind.value,
        "degree": f.degree.name.lower(),
        "location": f.location_text,
        "details": f.details,
        "current_value": value_to_json(f.current_value),
        "suggestion": f.suggestion,
        "category": f.category.value,
    }


def finding_from_dict(d: dict) -> RiskFinding:
    if sorted(d) != sorted(JSON_KEYS):
        raise ValueError(f"finding keys must be exactly {JSON_KEYS}, got {sorted(d)}")
    kind = DetectorKind(d["kind"])
    category = ErrorCategory.parse(d["category"])
    return RiskFinding(
        kind=kind,
        degree=RiskDegree.parse(d["degree"]),
        location=parse_location(d["location"]),
        details=d["details"],
        current_value=value_from_json(d["current_value"]),
        suggestion=d["suggestion"],
        subtype=subtype_for(kind, category),
        category=category,
    )


def _row(f: RiskFinding) -> list[str]:
    return [f.kind.title, f.degree.label, f.location_text, f.details,
            format_value(f.current_value), f.suggestion, f.category.value]


def emit_findings(findings, fmt: str = "json") -> str:
    findings = list(findings)
    if fmt == "json":
        return json.dumps([finding_to_dict(f) for f in findings], indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for f in findings:
            w.writerow(_row(f))
        return buf.getvalue()
    if fmt == "html":
        return _html_table(findings)
    raise ValueError(f"unknown findings format {fmt!r}")


def parse_findings(text: str) -> list[RiskFinding]:
    """Read a JSON findings document back into findings."""
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("a findings document is a JSON array")
    return [finding_from_dict(d) for d in data]


_DEGREE_CLASS = {RiskDegree.LOW: "risk-low", RiskDegree.MEDIUM: "risk-medium", RiskDegree.HIGH: "risk-high"}

_TABLE_CSS = """\
body { font-family: sans-serif; }
table { border-collapse: collapse; }
th, td { border: 1px solid #999; padding: 4px 8px; text-align: left; vertical-align: top; }
th { background: #ddd; }
td.risk-low { background: #fff59d; }
td.risk-medium { background: #ffcc80; }
td.risk-high { background: #ef9a9a; }
"""


def _html_table(findings) -> str:
    out = ["<!DOCTYPE html>", '<html><head><meta charset="utf-8"><title>Risk findings</title>',
           f"<style>\n{_TABLE_CSS}</style></head><body>", "<table>",
           "<tr>" + "".join(f"<th>{html.escape(c)}</th>" for c in COLUMNS) + "</tr>"]
    for f in findings:
        cells = [html.escape(x) for x in _row(f)]
        tds = [f"<td>{c}</td>" for c in cells]
        tds[1] = f'<td class="{_DEGREE_CLASS[f.degree]}">{cells[1]}</td>'
        out.append("<tr>" + "".join(tds) + "</tr>")
    out += ["</table>", "</body></html>", ""]
    return "\n".join(out)
