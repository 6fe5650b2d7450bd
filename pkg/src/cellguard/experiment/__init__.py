"""Seeded error injection and detector scoring."""

from .evaluation import CategoryScore, EvalReport, Trial, evaluate_detectors, run_experiment, run_trial
from .injection import (
    SIBLING_FUNCTIONS,
    InjectionEntry,
    InjectionPlan,
    InsufficientTargets,
    PlanMismatch,
    apply_injection,
    parse_mix,
    plan_injection,
)

__all__ = [
    "CategoryScore",
    "EvalReport",
    "InjectionEntry",
    "InjectionPlan",
    "InsufficientTargets",
    "PlanMismatch",
    "SIBLING_FUNCTIONS",
    "Trial",
    "apply_injection",
    "evaluate_detectors",
    "parse_mix",
    "plan_injection",
    "run_experiment",
    "run_trial",
]
