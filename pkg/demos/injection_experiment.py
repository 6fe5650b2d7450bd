"""Seed errors into a clean model and see which ones the detectors notice.

    python demos/injection_experiment.py [seeds]

Each category gets two injected errors per seed.  Reference, interface,
user-related and control-environment errors change the *structure* of the
sheet and are caught.  Financial-formula, logic and input errors keep the
structure intact; they show up only when they break a copy-filled run, and
a wrong digit in an input cell is invisible.
"""

import sys
from pathlib import Path

from cellguard.experiment import plan_injection, run_experiment
from cellguard.risk import ErrorCategory, run_all
from cellguard.workbook import load_workbook

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "reference.json"


def main(n_seeds: int = 25) -> None:
    wb = load_workbook(FIXTURE)
    print(f"baseline findings on the clean model: {len(run_all(wb))}\n")

    plan = plan_injection(wb, {c: 1 for c in ErrorCategory}, seed=0)
    print("one sample plan:")
    for e in plan.entries:
        print(f"  cat{e.category.number} {e.target}: {e.mutation}")
    print()

    print(f"{'category':<22}{'injected':>9}{'detected':>9}{'recall':>8}")
    total_fp = 0
    for cat in ErrorCategory:
        report = run_experiment(wb, {cat: 2}, range(n_seeds))
        score = report.per_category[cat]
        total_fp += report.false_pos
        print(f"cat{cat.number} {cat.value:<18}{score.injected:>9}{score.detected:>9}{score.recall:>8.2f}")
    print(f"\nnew findings away from any target (false positives): {total_fp}")


if __name__ == "__main__":
    main(*map(int, sys.argv[1:2]))
