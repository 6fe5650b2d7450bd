"""Print the sheet-level graph of a small workbook with every node style.

    python demos/sheet_graph.py | dot -Tpng -o graph.png

``Hidden`` is a hidden sheet (light blue), ``Secret`` is very hidden (grey)
and ``Budget.xlsx`` is an external workbook (orange ellipse).  Edge labels
count the cell-level references between two sheets; thicker pens mean more.
"""

from pathlib import Path

from cellguard.graph import aggregate_sheet_graph, build_cell_graph
from cellguard.reporting import emit_workbook_graph
from cellguard.risk import run_all, sheet_colors
from cellguard.workbook import load_workbook

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "visual.json"

if __name__ == "__main__":
    wb = load_workbook(FIXTURE)
    sg = aggregate_sheet_graph(build_cell_graph(wb), wb)
    print(emit_workbook_graph(sg, sheet_colors(wb, run_all(wb)), name=wb.name), end="")
