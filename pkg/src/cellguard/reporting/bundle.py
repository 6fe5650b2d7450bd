"""A directory of audit artifacts plus reproducibility metadata."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .. import __version__
from ..risk import AnalyzerConfig

PINNED_TIMESTAMP = "1970-01-01T00:00:00Z"


def config_hash(cfg: AnalyzerConfig) -> str:
    blob = json.dumps(cfg.to_mapping(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def make_meta(cfg: AnalyzerConfig, source: str = "", timestamp: bool = True) -> dict:
    now = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ") if timestamp else PINNED_TIMESTAMP
    return {"tool": "cellguard", "version": __version__, "config_hash": config_hash(cfg),
            "source": source, "generated_at": now}


@dataclass
class ReportBundle:
    findings_doc: str
    graph_doc: str
    heatmaps: dict = field(default_factory=dict)  # sheet name -> HTML
    meta: dict = field(default_factory=dict)
    findings_format: str = "json"

    def write(self, directory) -> list[Path]:
        """Write every artifact under ``directory`` and return the paths."""
        d = Path(directory)
        (d / "heatmaps").mkdir(parents=True, exist_ok=True)
        written = []

        def put(path: Path, text: str):
            path.write_text(text, encoding="utf-8", newline="")
            written.append(path)

        put(d / f"findings.{self.findings_format}", self.findings_doc)
        put(d / "workbook.dot", self.graph_doc)
        for i, (sheet, doc) in enumerate(self.heatmaps.items()):
            put(d / "heatmaps" / f"{i + 1:02d}-{safe_name(sheet)}.html", doc)
        put(d / "meta.json", json.dumps(self.meta, indent=2, sort_keys=True) + "\n")
        return written


def safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).strip("_") or "sheet"
