import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellguard.addr import CellAddr, CellRange
from cellguard.risk import (
    AnalyzerConfig,
    DetectorKind,
    ErrorCategory,
    RiskDegree,
    RiskFinding,
    detect_circle_chain,
    detect_copy_paste,
    detect_empty_reference,
    detect_excel_errors,
    detect_fixed_numbers,
    detect_jealousy,
    detect_long_chain,
    detect_many_ref_groups,
    detect_multi_function,
    detect_unusual_ranges,
    map_finding_to_category,
    run_all,
    sheet_colors,
    sheet_risk,
)
from cellguard.values import ErrorCode
from cellguard.workbook import Sheet, Workbook

CFG = AnalyzerConfig()


def wb_of(**sheets):
    return Workbook.from_mapping(sheets)


def kinds(findings):
    return [(f.kind, f.location_text) for f in findings]


FIGURE4_ROWS = [
    (DetectorKind.FIXED_NUMBERS, RiskDegree.LOW, "'Sao Paolo'!J4"),
    (DetectorKind.JEALOUSY, RiskDegree.MEDIUM, "'Sao Paolo'!C12"),
    (DetectorKind.JEALOUSY, RiskDegree.MEDIUM, "'Sao Paolo'!C12:C18"),
    (DetectorKind.COPY_PASTE, RiskDegree.MEDIUM, "'Sao Paolo'!A22:K27"),
    (DetectorKind.CIRCLE_CHAIN, RiskDegree.HIGH,
     "'Mexico City'!B2, 'Mexico City'!H2, Mumbai!G5, Mumbai!F16, 'New York'!B3, 'New York'!T45"),
    (DetectorKind.MANY_REF_GROUPS, RiskDegree.HIGH, "'Mexico City'!H4"),
    (DetectorKind.EMPTY_REFERENCE, RiskDegree.LOW, "'Mexico City'!J4"),
    (DetectorKind.FIXED_NUMBERS, RiskDegree.LOW, "'Mexico City'!J5"),
    (DetectorKind.JEALOUSY, RiskDegree.MEDIUM, "'Mexico City'!C12:C18"),
]


def test_figure4_rows(figure4):
    got = [(f.kind, f.degree, f.location_text) for f in run_all(figure4)]
    assert got == FIGURE4_ROWS


def test_figure4_values_and_text(figure4):
    by_loc = {f.location_text: f for f in run_all(figure4)}
    assert by_loc["'Sao Paolo'!A22:K27"].current_value == 5
    assert by_loc["'Sao Paolo'!A22:K27"].details == "Manilla!D10:N15"
    assert by_loc["'Sao Paolo'!C12"].current_value == 1200
    assert by_loc["'Sao Paolo'!J4"].current_value == 567
    assert by_loc["'Sao Paolo'!J4"].suggestion == "Consider placing 1.5 in separate cell"
    assert by_loc["'Mexico City'!H4"].current_value == 3
    assert by_loc["'Mexico City'!J4"].current_value == 765
    assert by_loc["'Mexico City'!J5"].current_value == 45
    assert by_loc["'Mexico City'!C12:C18"].details == "Same formula as 'Sao Paolo'!C12"
    assert by_loc["'Sao Paolo'!C12"].suggestion == "Move this formula to London"


def test_figure4_sheet_colours(figure4):
    colours = sheet_colors(figure4, run_all(figure4))
    assert colours["Mexico City"] == "red"
    assert colours["Sao Paolo"] == "orange"
    assert colours["London"] == colours["Manilla"] == "green"


def test_reference_fixture_is_clean(reference):
    assert run_all(reference) == []


# -- thresholds -------------------------------------------------------------------

def test_fixed_numbers_allowlist():
    wb = wb_of(S={"A1": 5, "B1": "=A1*1+0-1", "B2": "=A1*2.5", "B3": "=-3+A1"})
    assert kinds(detect_fixed_numbers(wb, CFG)) == [
        (DetectorKind.FIXED_NUMBERS, "S!B2"), (DetectorKind.FIXED_NUMBERS, "S!B3")]
    cfg = AnalyzerConfig(fixed_number_allowlist={0, 1, -1, 2.5, -3})
    assert detect_fixed_numbers(wb, cfg) == []


@pytest.mark.parametrize("n_foreign, n_home, hit", [
    (3, 0, False),   # below the minimum count
    (4, 0, True),
    (4, 4, False),   # exactly half is not "most"
    (5, 4, True),
])
def test_jealousy_boundaries(n_foreign, n_home, hit):
    refs = [f"Other!A{i + 1}" for i in range(n_foreign)] + [f"B{i + 1}" for i in range(n_home)]
    wb = wb_of(S={"C1": "=" + "+".join(refs)}, Other={f"A{i + 1}": i for i in range(6)})
    assert bool(detect_jealousy(wb, CFG)) == hit


def test_jealousy_groups_copies():
    refs = lambda r: "+".join(f"Other!$A{r + k}" for k in range(4))  # noqa: E731
    wb = wb_of(S={"C1": "=" + refs(1), "C2": "=" + refs(2), "C3": "=" + refs(3), "E9": "=" + refs(9)},
               Other={f"A{i}": i for i in range(1, 13)})
    got = [(f.location_text, f.details) for f in detect_jealousy(wb, CFG)]
    assert got[0] == ("S!C1", "Other!$A1+Other!$A2+Other!$A3+Other!$A4")
    assert ("S!C1:C3", "Same formula") in got
    assert ("S!E9", "Same formula as S!C1") in got


def test_multi_function_threshold():
    three = wb_of(S={"A1": "=ROUND(ABS(SUM(B1:B3)),0)"})
    four = wb_of(S={"A1": "=ROUND(ABS(SUM(B1:B3)+MAX(B1:B3)),0)"})
    assert detect_multi_function(three, CFG) == []
    assert [f.degree for f in detect_multi_function(four, CFG)] == [RiskDegree.MEDIUM]


def test_many_ref_groups_threshold():
    five = wb_of(S={"A1": "=1*B1+2*B2+3*B3+4*B4+5*B5"})
    six = wb_of(S={"A1": "=1*B1+2*B2+3*B3+4*B4+5*B5+6*B6"})
    assert detect_many_ref_groups(five, CFG) == []
    assert [f.degree for f in detect_many_ref_groups(six, CFG)] == [RiskDegree.HIGH]


def test_many_ref_groups_subsumes_multi_function():
    wb = wb_of(S={"A1": "=IF(B1>0,IF(B2>0,IF(B3>0,IF(B4>0,B5,B6),B7),B8),B9)",
                  **{f"B{r}": r for r in range(1, 10)}})
    assert [f.kind for f in run_all(wb)] == [DetectorKind.MANY_REF_GROUPS]


@pytest.mark.parametrize("length, hit", [(7, False), (8, True)])
def test_long_chain_threshold(length, hit):
    cells = {"A1": 1, **{f"A{r}": f"=A{r - 1}+1" for r in range(2, length + 2)}}
    found = detect_long_chain(wb_of(S=cells), CFG)
    assert [f.location_text for f in found] == ([f"S!A1, S!A{length + 1}"] if hit else [])


@pytest.mark.parametrize("cols, hit", [(5, False), (6, True)])
def test_copy_paste_block_size(cols, hit):
    src = {f"{chr(65 + c)}1": f"={c + 10}*1" for c in range(cols)}
    wb = wb_of(Src=src, Dst={f"{chr(65 + c)}5": c + 10 for c in range(cols)})
    wb = wb.with_cells({CellAddr("Src", 1, c + 1): type(wb.cell(CellAddr("Src", 1, c + 1)))(c + 10, src[f"{chr(65 + c)}1"])
                        for c in range(cols)})
    found = detect_copy_paste(wb, CFG)
    assert [(f.location_text, f.details) for f in found] == (
        [(f"Dst!A5:{chr(64 + cols)}5", f"Src!A1:{chr(64 + cols)}1")] if hit else [])


def test_copy_paste_skips_formulas_that_read_the_literal():
    wb = wb_of(S={**{f"A{r}": r for r in range(1, 9)}, **{f"B{r}": (f"=A{r}", r) for r in range(1, 9)}})
    assert detect_copy_paste(wb, CFG) == []


def test_empty_reference_subtypes():
    wb = wb_of(S={"A1": "=B1+1", "A2": "='[X.xlsx]T'!A1"})
    found = detect_empty_reference(wb, CFG)
    assert [(f.location_text, map_finding_to_category(f)) for f in found] == [
        ("S!A1", ErrorCategory.REFERENCE), ("S!A2", ErrorCategory.INTERFACE)]
    assert found[0].suggestion == "Remove reference to S!B1; Add a value to S!B1"


def test_excel_error_degree_depends_on_use():
    wb = wb_of(S={"A1": ErrorCode.NA, "A2": "=A1", "B1": ("=1/0", ErrorCode.DIV0)})
    found = {f.location_text: f.degree for f in detect_excel_errors(wb, CFG)}
    assert found == {"S!A1": RiskDegree.HIGH, "S!B1": RiskDegree.MEDIUM}


def test_circle_chain():
    wb = wb_of(S={"A1": "=B1", "B1": "=C1", "C1": "=A1", "D1": "=D1"})
    found = detect_circle_chain(wb, CFG)
    assert [f.location_text for f in found] == ["S!A1, S!B1, S!C1", "S!D1"]
    # Details follow the data flow: A1 feeds C1, which feeds B1.
    assert found[0].details == "S!A1 = B1; S!C1 = A1; S!B1 = C1"


def test_unusual_range_categories():
    cells = {**{f"A{r}": r for r in range(1, 9)}, **{f"B{r}": f"=A{r}*2" for r in range(1, 9)}}
    cells["B4"] = 7
    cells["B6"] = "=A6*3"
    found = detect_unusual_ranges(wb_of(S=cells), CFG)
    assert [(f.location_text, f.category) for f in found] == [
        ("S!B4", ErrorCategory.CONTROL_ENVIRONMENT), ("S!B6", ErrorCategory.REFERENCE)]


def test_degree_overrides():
    cfg = AnalyzerConfig(degree_overrides={"fixed-numbers": "high"})
    wb = wb_of(S={"A1": "=2*3"})
    assert [f.degree for f in detect_fixed_numbers(wb, cfg)] == [RiskDegree.HIGH]


def test_config_files(tmp_path):
    toml = tmp_path / "c.toml"
    toml.write_text('jealousy_min_refs = 6\nfixed_number_allowlist = [0, 1, 100]\n')
    cfg = AnalyzerConfig.from_file(toml)
    assert cfg.jealousy_min_refs == 6 and 100.0 in cfg.fixed_number_allowlist
    js = tmp_path / "c.json"
    js.write_text('{"long_chain_threshold": 3}')
    assert AnalyzerConfig.from_file(js).long_chain_threshold == 3
    with pytest.raises(ValueError):
        AnalyzerConfig.from_mapping({"nope": 1})
    with pytest.raises(ValueError):
        AnalyzerConfig(min_run=0)
    with pytest.raises(ValueError):
        AnalyzerConfig(jealousy_fraction=1.5)
    assert AnalyzerConfig.from_mapping(AnalyzerConfig().to_mapping()) == AnalyzerConfig()


# -- scoring ----------------------------------------------------------------------

def _finding(degree, sheet="S"):
    return RiskFinding(DetectorKind.FIXED_NUMBERS, degree, (CellRange(sheet, 1, 1, 1, 1),), "", None, "fix")


COLOUR_RANK = {"green": 0, "orange": 1, "red": 2}


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(list(RiskDegree)), max_size=10), st.sampled_from(list(RiskDegree)),
       st.integers(0, 60))
def test_sheet_risk_is_monotone(degrees, extra, cells):
    base = [_finding(d) for d in degrees]
    s1, c1 = sheet_risk(base, "S", CFG, cells)
    s2, c2 = sheet_risk(base + [_finding(extra)], "S", CFG, cells)
    assert s2 >= s1
    assert COLOUR_RANK[c2] >= COLOUR_RANK[c1]


def test_sheet_risk_rules():
    assert sheet_risk([], "S", CFG, 10) == (0.0, "green")
    assert sheet_risk([_finding(RiskDegree.HIGH)], "S", CFG, 1000)[1] == "red"
    assert sheet_risk([_finding(RiskDegree.MEDIUM)], "S", CFG, 1000)[1] == "orange"
    assert sheet_risk([_finding(RiskDegree.LOW)], "S", CFG, 100)[1] == "green"
    assert sheet_risk([_finding(RiskDegree.LOW)], "S", CFG, 10)[1] == "orange"
    assert sheet_risk([_finding(RiskDegree.LOW)], "S", CFG, 2)[1] == "red"
    assert sheet_risk([_finding(RiskDegree.HIGH, "T")], "S", CFG, 2)[1] == "green"


# -- determinism ------------------------------------------------------------------

def test_jobs_do_not_change_output(figure4):
    assert run_all(figure4, jobs=1) == run_all(figure4, jobs=8)


def test_insertion_order_does_not_matter(figure4):
    rng = random.Random(1)
    for _ in range(5):
        sheets = []
        for s in figure4.sheets:
            items = list(s.cells.items())
            rng.shuffle(items)
            sheets.append(Sheet(s.name, dict(items), s.visibility))
        shuffled = Workbook(tuple(sheets), figure4.name, external_values=dict(figure4.external_values))
        assert run_all(shuffled) == run_all(figure4)


def test_unparseable_formulas_become_warnings():
    from cellguard.risk import Analysis
    wb = wb_of(S={"A1": "=1+", "A2": "=A1*2"})
    ctx = Analysis(wb, CFG).prepare()
    run_all(wb, CFG, analysis=ctx)
    assert len(ctx.warnings) == 1 and "S!A1" in ctx.warnings[0]
