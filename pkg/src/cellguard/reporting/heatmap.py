"""Static HTML view of one sheet: cell classes, consistent ranges, risk overlay.

Two checkboxes toggle the class colouring and the risk overlay through CSS
sibling selectors, so the page needs no script.
"""

from __future__ import annotations

import html

from ..addr import col_to_letters
from ..risk.model import RiskDegree
from ..risk.scoring import cell_degrees
from ..structure import CellClass, classify_cell
from ..values import format_value
from ..workbook import Sheet

CLASS_CSS = {
    CellClass.TEXT: "orange",
    CellClass.NUMBER: "yellow",
    CellClass.FORMULA: "#64b5f6",
    CellClass.BOOLEAN: "#ce93d8",
    CellClass.ERROR: "#e57373",
}
RISK_CSS = {RiskDegree.LOW: "yellow", RiskDegree.MEDIUM: "orange", RiskDegree.HIGH: "red"}
RANGE_COLOUR = "purple"
# Grids start at A1 unless that would make the page absurdly large.
MAX_GRID_CELLS = 250_000


def _style() -> str:
    rules = [
        "body { font-family: sans-serif; }",
        "table.grid { border-collapse: collapse; }",
        "table.grid td, table.grid th { border: 1px solid #ccc; padding: 2px 6px; min-width: 3em; }",
        "table.grid th { background: #eee; font-weight: normal; }",
    ]
    for cls, colour in CLASS_CSS.items():
        rules.append(f"#show-classes:checked ~ table td.c-{cls.value} {{ background: {colour}; }}")
    for side in ("top", "bottom", "left", "right"):
        rules.append(f"td.rng-{side[0]} {{ border-{side}: 2px solid {RANGE_COLOUR}; }}")
    for degree, colour in RISK_CSS.items():
        rules.append(f"#show-risk:checked ~ table td.risk-{degree.name.lower()} "
                     f"{{ background: {colour}; box-shadow: inset 0 0 0 2px #333; }}")
    return "\n".join(rules)


def emit_heatmap(sheet: Sheet, classes: dict | None = None, ranges=(), findings=()) -> str:
    """Grid table for ``sheet``.

    ``classes`` maps ``(row, col)`` to CellClass and defaults to classifying
    every stored cell.  Each consistent range gets a purple outline; cells
    under findings get a risk class for their highest degree.
    """
    if classes is None:
        classes = {pos: classify_cell(c) for pos, c in sheet.cells.items()}
    degrees = cell_degrees(findings, sheet.name)
    edges: dict = {}
    for r in ranges:
        for row in range(r.top, r.bottom + 1):
            for col in range(r.left, r.right + 1):
                e = edges.setdefault((row, col), set())
                if row == r.top:
                    e.add("t")
                if row == r.bottom:
                    e.add("b")
                if col == r.left:
                    e.add("l")
                if col == r.right:
                    e.add("r")
    title = html.escape(sheet.name)
    out = ["<!DOCTYPE html>", '<html><head><meta charset="utf-8">',
           f"<title>{title}</title>", f"<style>\n{_style()}\n</style></head><body>",
           f"<h1>{title}</h1>",
           '<input type="checkbox" id="show-classes" checked><label for="show-classes">Cell types</label>',
           '<input type="checkbox" id="show-risk" checked><label for="show-risk">Risks</label>',
           '<table class="grid">']
    bounds = sheet.bounds
    if bounds is not None:
        top, left, bottom, right = bounds
        if bottom * right <= MAX_GRID_CELLS:
            top = left = 1
        rows = range(top, bottom + 1)
        cols = range(left, right + 1)
        out.append("<tr><th></th>" + "".join(f"<th>{col_to_letters(c)}</th>" for c in cols) + "</tr>")
        for row in rows:
            tds = []
            for col in cols:
                cell = sheet.get(row, col)
                css = [f"c-{classes.get((row, col), CellClass.BLANK).value}"]
                css += [f"rng-{s}" for s in sorted(edges.get((row, col), ()))]
                if (row, col) in degrees:
                    css.append(f"risk-{degrees[(row, col)].name.lower()}")
                attrs = f' class="{" ".join(css)}"'
                text = ""
                if cell is not None:
                    text = html.escape(format_value(cell.value))
                    if cell.is_formula:
                        attrs += f' title="{html.escape(cell.formula)}"'
                tds.append(f"<td{attrs}>{text}</td>")
            out.append(f"<tr><th>{row}</th>" + "".join(tds) + "</tr>")
    out += ["</table>", "</body></html>", ""]
    return "\n".join(out)
