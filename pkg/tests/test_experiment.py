import json
import pytest

from cellguard.addr import CellAddr, CellRange
from cellguard.experiment import (
    InjectionPlan,
    InsufficientTargets,
    PlanMismatch,
    apply_injection,
    evaluate_detectors,
    parse_mix,
    plan_injection,
    run_experiment,
    run_trial,
)
from cellguard.experiment.injection import MIN_SPACING
from cellguard.formula import Binary, extract_refs, parse, walk
from cellguard.risk import DetectorKind, ErrorCategory, RiskDegree, RiskFinding, run_all
from cellguard.values import is_number
from cellguard.workbook import Cell, Workbook

E = ErrorCategory


def column_book():
    cells = {f"A{r}": r * 10 for r in range(1, 11)}
    cells.update({f"B{r}": (f"=A{r}*2", r * 20) for r in range(1, 11)})
    return Workbook.from_mapping({"S": cells})


def test_control_environment_on_a_column():
    wb = column_book()
    plan = plan_injection(wb, {E.CONTROL_ENVIRONMENT: 1}, seed=1)
    (e,) = plan.entries
    assert e.category is E.CONTROL_ENVIRONMENT
    assert e.original.is_formula and not e.mutated.is_formula and is_number(e.mutated.value)
    assert e.mutated.value != e.original.value
    mutated = apply_injection(wb, plan)
    assert mutated.cell(e.target) == e.mutated


def test_plans_are_reproducible(reference):
    mix = {E.from_number(k): 1 for k in range(1, 8)}
    assert plan_injection(reference, mix, 5) == plan_injection(reference, mix, 5)
    assert apply_injection(reference, plan_injection(reference, mix, 5)) == \
        apply_injection(reference, plan_injection(reference, mix, 5))
    assert plan_injection(reference, mix, 5) != plan_injection(reference, mix, 6)


def test_all_seven_categories(reference):
    plan = plan_injection(reference, {E.from_number(k): 1 for k in range(1, 8)}, 3)
    assert sorted(e.category.number for e in plan.entries) == list(range(1, 8))


def test_mutation_shapes(reference):
    plan = plan_injection(reference, {E.from_number(k): 1 for k in range(1, 8)}, 11)
    by = {e.category: e for e in plan.entries}
    f2 = by[E.FINANCIAL_FORMULA]
    a, b = parse(f2.original.formula), parse(f2.mutated.formula)
    assert extract_refs(a) == extract_refs(b)
    ops = lambda t: [n.op for n in walk(t) if isinstance(n, Binary)]  # noqa: E731
    assert len(ops(a)) == len(ops(b)) and ops(a) != ops(b)
    assert "AVERAGE" in by[E.EXCEL_LOGIC].mutated.formula
    assert "Missing" in by[E.INTERFACE].mutated.formula
    assert by[E.USER_RELATED].mutated == Cell(by[E.USER_RELATED].original.value)
    r1 = parse(by[E.REFERENCE].mutated.formula)
    assert r1 != parse(by[E.REFERENCE].original.formula)


def test_digit_transposition():
    wb = Workbook.from_mapping({"S": {"A1": 487}})
    outcomes = set()
    for seed in range(30):
        (e,) = plan_injection(wb, {E.INPUT: 1}, seed).entries
        new = int(e.mutated.value)
        assert sorted(str(new)) == sorted("487") and new != 487
        outcomes.add(new)
    assert outcomes == {478, 847}


def test_single_digit_and_repeated_digits_are_not_eligible():
    wb = Workbook.from_mapping({"S": {"A1": 7, "A2": 55, "A3": 2.5}})
    with pytest.raises(InsufficientTargets) as info:
        plan_injection(wb, {E.INPUT: 1}, 0)
    assert (info.value.wanted, info.value.available) == (1, 0)


def test_insufficient_targets():
    with pytest.raises(InsufficientTargets) as info:
        plan_injection(column_book(), {E.CONTROL_ENVIRONMENT: 5}, 0)
    assert info.value.category is E.CONTROL_ENVIRONMENT
    assert info.value.available < 5


def test_targets_are_distinct_and_spaced(reference):
    mix = {E.from_number(k): 2 for k in range(1, 8)}
    for seed in range(15):
        targets = plan_injection(reference, mix, seed).targets
        assert len(set(targets)) == len(targets)
        for i, a in enumerate(targets):
            for b in targets[i + 1:]:
                if a.sheet == b.sheet and a.row == b.row:
                    assert abs(a.col - b.col) >= MIN_SPACING
                if a.sheet == b.sheet and a.col == b.col:
                    assert abs(a.row - b.row) >= MIN_SPACING


def test_empty_plan_is_identity(reference):
    assert apply_injection(reference, InjectionPlan(0, ())) == reference


def test_plan_mismatch(reference):
    plan = plan_injection(reference, {E.CONTROL_ENVIRONMENT: 1}, 0)
    other = reference.with_cells({plan.targets[0]: Cell(1)})
    with pytest.raises(PlanMismatch):
        apply_injection(other, plan)


def test_caches_are_refreshed(reference):
    target = CellAddr("Sales", 5, 4)  # D5 = B5*C5
    before = reference.cell(target)
    from cellguard.experiment import InjectionEntry
    plan = InjectionPlan(0, (InjectionEntry(E.CONTROL_ENVIRONMENT, target, "x", before, Cell(1000)),))
    out = apply_injection(reference, plan)
    delta = 1000 - before.value
    assert out.value_at(CellAddr("Sales", 24, 4)) == pytest.approx(reference.value_at(CellAddr("Sales", 24, 4)) + delta)
    assert out.value_at(CellAddr("Sales", 5, 5)) == pytest.approx(reference.value_at(CellAddr("Sales", 5, 5)) + delta)
    assert out.value_at(CellAddr("Summary", 3, 2)) == pytest.approx(reference.value_at(CellAddr("Summary", 3, 2)) + delta)


def test_unsupported_functions_leave_stale_caches():
    wb = Workbook.from_mapping({"S": {**{f"A{r}": r + 10 for r in range(1, 6)}, "B1": ("=NPV(0.1,A1:A5)", 40)}})
    plan = plan_injection(wb, {E.INPUT: 1}, 0)
    out = apply_injection(wb, plan)
    assert out.cell(CellAddr("S", 1, 2)) == Cell(None, "=NPV(0.1,A1:A5)")


def test_plan_file_round_trip(reference):
    plan = plan_injection(reference, {E.from_number(k): 1 for k in range(1, 8)}, 2)
    text = plan.to_json()
    assert InjectionPlan.from_json(text) == plan
    entries = json.loads(text)["entries"]
    assert InjectionPlan.from_json(json.dumps(entries)).entries == plan.entries
    assert entries[0]["target"].count("!") == 1


def test_parse_mix():
    assert parse_mix("cat1=2, cat7=1") == {E.REFERENCE: 2, E.CONTROL_ENVIRONMENT: 1}
    assert parse_mix("Interface=3") == {E.INTERFACE: 3}
    for bad in ("cat1", "cat8=1", "cat1=x", "cat1=-1"):
        with pytest.raises(ValueError):
            parse_mix(bad)


def _finding(ref, kind=DetectorKind.UNUSUAL_RANGE):
    return RiskFinding(kind, RiskDegree.MEDIUM, (CellRange("S", *ref),), "", None, "fix")


def test_evaluation_rules():
    from cellguard.experiment import InjectionEntry
    e = InjectionEntry(E.CONTROL_ENVIRONMENT, CellAddr("S", 4, 2), "x", Cell(1, "=A4"), Cell(9))
    plan = InjectionPlan(0, (e,))
    hit = evaluate_detectors([_finding((4, 2, 4, 2))], plan)
    assert hit.recall == 1.0 and hit.precision == 1.0
    assert hit.per_category[E.CONTROL_ENVIRONMENT].detected == 1
    # A range-located finding counts by containment.
    assert evaluate_detectors([_finding((1, 1, 9, 9))], plan).true_pos == 1
    miss = evaluate_detectors([_finding((7, 7, 7, 7))], plan)
    assert (miss.true_pos, miss.false_pos, miss.false_neg) == (0, 1, 1)
    assert miss.precision == 0.0 and miss.recall == 0.0
    # Findings the pristine workbook already had are not false positives.
    assert evaluate_detectors([_finding((7, 7, 7, 7))], plan, baseline=[_finding((7, 7, 7, 7))]).false_pos == 0
    empty = evaluate_detectors([], InjectionPlan(0, ()))
    assert empty.precision == 1.0 and empty.recall == 1.0


def test_report_json_round_trip(reference):
    trial = run_trial(reference, {E.CONTROL_ENVIRONMENT: 2, E.INPUT: 1}, 4)
    d = json.loads(trial.report.to_json())
    assert set(d) == {"per_category", "overall", "wall_time_seconds"}
    assert set(d["overall"]) == {"true_pos", "false_pos", "false_neg", "precision", "recall"}
    for v in d["per_category"].values():
        assert v["detected"] <= v["injected"]
        assert 0 <= v["recall"] <= 1
    from cellguard.experiment import EvalReport
    back = EvalReport.from_dict(d)
    assert back.to_dict()["per_category"] == d["per_category"]


def test_overwrite_in_consistent_column_is_caught_by_unusual_range():
    wb = column_book()
    trial = run_trial(wb, {E.CONTROL_ENVIRONMENT: 1}, 9)
    target = trial.plan.targets[0]
    assert any(f.kind is DetectorKind.UNUSUAL_RANGE and f.contains(target) for f in trial.findings)
    assert trial.report.recall == 1.0 and trial.report.false_pos == 0


def test_run_experiment_merges(reference):
    report = run_experiment(reference, {E.USER_RELATED: 1}, range(3))
    assert report.per_category[E.USER_RELATED].injected == 3
    assert run_all(reference) == []
