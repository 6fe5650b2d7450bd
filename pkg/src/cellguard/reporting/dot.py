"""Graphviz DOT for the sheet-level dependency graph."""

from __future__ import annotations

import math

from ..graph import SheetGraph
from ..workbook import Visibility

HIDDEN_FILL = "lightblue"
VERY_HIDDEN_FILL = "grey"
EXTERNAL_FILL = "orange"
MISSING_FILL = "white"
# Optional arrow colours: grey when the dependent sheet sits to the right of
# its precedent in tab order, purple otherwise.
RIGHTWARD_ARROW = "grey"
LEFTWARD_ARROW = "purple"


def quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def pen_width(weight: int) -> str:
    """Edge thickness, growing with log(1 + weight)."""
    return f"{1.5 * math.log1p(weight):.3f}"


def node_fill(node, risks: dict) -> str:
    if node.is_external:
        return EXTERNAL_FILL
    if node.missing:
        return MISSING_FILL
    if node.visibility is Visibility.HIDDEN:
        return HIDDEN_FILL
    if node.visibility is Visibility.VERY_HIDDEN:
        return VERY_HIDDEN_FILL
    return risks.get(node.name, "green")


def emit_workbook_graph(sg: SheetGraph, risks: dict | None = None, legacy_arrow_colors: bool = False,
                        name: str = "workbook") -> str:
    """DOT text with one node per sheet or external source and weighted edges.

    ``risks`` maps visible sheet names to green/orange/red.  Node and edge
    order follow the SheetGraph, which is deterministic.
    """
    risks = risks or {}
    position = {n.name: i for i, n in enumerate(sg.nodes)}
    lines = [f"digraph {quote(name)} {{",
             "  rankdir=LR;",
             '  node [shape=box, style=filled, fontname="Helvetica"];']
    for n in sg.nodes:
        attrs = [f"fillcolor={quote(node_fill(n, risks))}"]
        if n.is_external:
            attrs.append("shape=ellipse")
        if n.missing:
            attrs.append('style="filled,dashed"')
        if not n.is_external and n.visibility is not Visibility.VISIBLE:
            attrs.append(f"tooltip={quote(n.visibility.value)}")
        lines.append(f"  {quote(n.name)} [{', '.join(attrs)}];")
    for (src, dst), w in sg.edges.items():
        attrs = [f"penwidth={pen_width(w)}", f"label={quote(str(w))}"]
        if legacy_arrow_colors:
            colour = RIGHTWARD_ARROW if position[dst] > position[src] else LEFTWARD_ARROW
            attrs.append(f"color={quote(colour)}")
        lines.append(f"  {quote(src)} -> {quote(dst)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
