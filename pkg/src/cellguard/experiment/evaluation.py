"""Score detector output against an injection plan."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from ..risk import AnalyzerConfig, run_all
from ..risk.model import ErrorCategory, RiskFinding
from ..workbook import Workbook
from .injection import InjectionPlan, apply_injection, plan_injection


def _ratio(num: int, den: int) -> float:
    return num / den if den else 1.0


@dataclass(frozen=True)
class CategoryScore:
    injected: int
    detected: int

    @property
    def recall(self) -> float:
        return _ratio(self.detected, self.injected)

    def to_dict(self) -> dict:
        return {"injected": self.injected, "detected": self.detected, "recall": self.recall}


@dataclass(frozen=True)
class EvalReport:
    """Per-category recall plus overall counts.

    ``true_pos`` counts injected entries that some finding covers and
    ``false_neg`` the rest.  ``false_pos`` counts findings that cover no
    target and were not already reported on the pristine workbook.
    Empty denominators give a ratio of 1.0.
    """

    per_category: dict = field(default_factory=dict)  # ErrorCategory -> CategoryScore
    true_pos: int = 0
    false_pos: int = 0
    false_neg: int = 0
    wall_time_seconds: float = 0.0
    new_findings: tuple = ()

    @property
    def precision(self) -> float:
        return _ratio(self.true_pos, self.true_pos + self.false_pos)

    @property
    def recall(self) -> float:
        return _ratio(self.true_pos, self.true_pos + self.false_neg)

    def to_dict(self) -> dict:
        ordered = sorted(self.per_category.items(), key=lambda kv: kv[0].number)
        return {
            "per_category": {c.value: s.to_dict() for c, s in ordered},
            "overall": {
                "true_pos": self.true_pos,
                "false_pos": self.false_pos,
                "false_neg": self.false_neg,
                "precision": self.precision,
                "recall": self.recall,
            },
            "wall_time_seconds": round(self.wall_time_seconds, 6),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> EvalReport:
        per = {ErrorCategory.parse(k): CategoryScore(v["injected"], v["detected"])
               for k, v in d["per_category"].items()}
        o = d["overall"]
        return cls(per, o["true_pos"], o["false_pos"], o["false_neg"], float(d.get("wall_time_seconds", 0.0)))

    def merged(self, other: EvalReport) -> EvalReport:
        per = dict(self.per_category)
        for c, s in other.per_category.items():
            old = per.get(c, CategoryScore(0, 0))
            per[c] = CategoryScore(old.injected + s.injected, old.detected + s.detected)
        return EvalReport(per, self.true_pos + other.true_pos, self.false_pos + other.false_pos,
                          self.false_neg + other.false_neg,
                          self.wall_time_seconds + other.wall_time_seconds,
                          self.new_findings + other.new_findings)


def evaluate_detectors(findings, plan: InjectionPlan, baseline=None,
                       wall_time_seconds: float = 0.0) -> EvalReport:
    """Count detections entry by entry; see :class:`EvalReport` for the rules.

    ``baseline`` holds the findings of the pristine workbook; when omitted,
    every finding away from the targets counts as a false positive.
    """
    findings = list(findings)
    known = {f.key for f in (baseline or ())}
    per: dict = {}
    tp = 0
    for e in plan.entries:
        hit = any(f.contains(e.target) for f in findings)
        old = per.get(e.category, CategoryScore(0, 0))
        per[e.category] = CategoryScore(old.injected + 1, old.detected + int(hit))
        tp += hit
    new = tuple(f for f in findings
                if not any(f.contains(t) for t in plan.targets) and f.key not in known)
    return EvalReport(per, tp, len(new), len(plan.entries) - tp, wall_time_seconds, new)


@dataclass
class Trial:
    plan: InjectionPlan
    mutated: Workbook
    findings: list[RiskFinding]
    report: EvalReport


def run_trial(wb: Workbook, mix: dict, seed: int, cfg: AnalyzerConfig | None = None,
              baseline: list | None = None) -> Trial:
    """Plan, inject, audit (timed) and score one seeded trial."""
    cfg = cfg or AnalyzerConfig()
    if baseline is None:
        baseline = run_all(wb, cfg)
    plan = plan_injection(wb, mix, seed)
    mutated = apply_injection(wb, plan)
    start = time.perf_counter()
    findings = run_all(mutated, cfg)
    elapsed = time.perf_counter() - start
    return Trial(plan, mutated, findings, evaluate_detectors(findings, plan, baseline, elapsed))


def run_experiment(wb: Workbook, mix: dict, seeds, cfg: AnalyzerConfig | None = None) -> EvalReport:
    """Trials over ``seeds`` merged into one report (wall time is the audit total)."""
    cfg = cfg or AnalyzerConfig()
    baseline = run_all(wb, cfg)
    total = EvalReport()
    for seed in seeds:
        total = total.merged(run_trial(wb, mix, seed, cfg, baseline).report)
    return total
