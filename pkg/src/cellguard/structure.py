"""Cell classification, consistent formula rectangles and the cells that break them.

Two formula cells are consistent when their relative (R1C1) normal forms
match, i.e. one is a copy-fill of the other.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass

from .addr import CellAddr, CellRange
from .formula import FormulaSyntaxError, extract_refs, parse, relative_normal_form
from .values import ErrorCode, is_number
from .workbook import Cell, Sheet

EXACT_SEARCH_LIMIT = 50_000
DEFAULT_MIN_RUN = 3


class CellClass(str, enum.Enum):
    TEXT = "text"
    NUMBER = "number"
    FORMULA = "formula"
    BOOLEAN = "boolean"
    ERROR = "error"
    BLANK = "blank"


def classify_cell(cell: Cell | None) -> CellClass:
    if cell is None or cell.is_blank:
        return CellClass.BLANK
    if cell.is_formula:
        return CellClass.FORMULA
    v = cell.value
    if isinstance(v, bool):
        return CellClass.BOOLEAN
    if isinstance(v, ErrorCode):
        return CellClass.ERROR
    if is_number(v):
        return CellClass.NUMBER
    return CellClass.TEXT


@dataclass(frozen=True)
class ConsistentRange:
    sheet: str
    top: int
    left: int
    bottom: int
    right: int
    normal_form: str
    member_count: int
    approximate: bool = False

    @property
    def rect(self) -> tuple[int, int, int, int]:
        return self.top, self.left, self.bottom, self.right

    @property
    def cell_range(self) -> CellRange:
        return CellRange(self.sheet, self.top, self.left, self.bottom, self.right)


def normal_forms(sheet: Sheet) -> dict:
    """``{(row, col): normal form}`` for every parseable formula on ``sheet``."""
    out = {}
    for (row, col), cell in sheet.cells.items():
        if not cell.is_formula:
            continue
        try:
            out[(row, col)] = relative_normal_form(parse(cell.formula), CellAddr(sheet.name, row, col))
        except FormulaSyntaxError:
            pass
    return out


def _runs(mask: int):
    """``(lo, hi)`` bit positions of each run of set bits, lowest first."""
    pos = 0
    while mask:
        tz = (mask & -mask).bit_length() - 1
        mask >>= tz
        pos += tz
        ones = (~mask & (mask + 1)).bit_length() - 1
        yield pos, pos + ones - 1
        mask >>= ones
        pos += ones


def _span_mask(lo: int, hi: int) -> int:
    return ((1 << (hi - lo + 1)) - 1) << lo


def maximal_rectangles(cells) -> list[tuple[int, int, int, int]]:
    """Every maximal all-filled rectangle over a set of ``(row, col)`` cells.

    Rows are column bitmasks.  For each top row the masks are AND-ed downward;
    each run of the running AND is a candidate that cannot grow sideways, and
    it is kept when neither the row above nor the row below covers it.
    """
    rows = defaultdict(int)
    for r, c in cells:
        rows[r] |= 1 << c
    out = []
    for top in sorted(rows):
        above = rows.get(top - 1, 0)
        acc = rows[top]
        bottom = top
        while acc:
            # Anything the row above fully covers grows upward; once every
            # remaining column is covered from above, nothing new can start here.
            if acc & ~above == 0:
                break
            below = rows.get(bottom + 1, 0)
            for lo, hi in _runs(acc):
                span = _span_mask(lo, hi)
                if above & span != span and below & span != span:
                    out.append((top, lo, bottom, hi))
            acc &= below
            bottom += 1
    return sorted(out)


def _greedy_rectangles(cells) -> list[tuple[int, int, int, int]]:
    """Row runs stacked while consecutive rows repeat the same run."""
    rows = defaultdict(int)
    for r, c in cells:
        rows[r] |= 1 << c
    open_runs: dict = {}  # run -> starting row
    out = []
    prev = None
    for r in sorted(rows):
        current = set(_runs(rows[r]))
        for run in list(open_runs):
            if prev != r - 1 or run not in current:
                out.append((open_runs.pop(run), run[0], prev, run[1]))
        for run in current:
            open_runs.setdefault(run, r)
        prev = r
    for run, start in open_runs.items():
        out.append((start, run[0], prev, run[1]))
    return sorted(out)


def find_consistent_ranges(sheet: Sheet, forms: dict | None = None,
                           exact_limit: int = EXACT_SEARCH_LIMIT) -> list[ConsistentRange]:
    """Maximal rectangles of formula cells sharing one normal form (≥ 2 cells).

    Overlapping maximal rectangles are all reported.  Sheets with more than
    ``exact_limit`` cells use a greedy row-run merge and flag the output as
    approximate.
    """
    if forms is None:
        forms = normal_forms(sheet)
    approximate = len(sheet.cells) > exact_limit
    groups = defaultdict(list)
    for pos, nf in forms.items():
        groups[nf].append(pos)
    out = []
    for nf, cells in groups.items():
        if len(cells) < 2:
            continue
        rects = _greedy_rectangles(cells) if approximate else maximal_rectangles(cells)
        for top, left, bottom, right in rects:
            area = (bottom - top + 1) * (right - left + 1)
            if area >= 2:
                out.append(ConsistentRange(sheet.name, top, left, bottom, right, nf, area, approximate))
    out.sort(key=lambda r: (r.top, r.left, r.bottom, r.right, r.normal_form))
    return out


@dataclass(frozen=True)
class Inconsistency:
    cell: CellAddr
    expected_normal_form: str
    actual: str  # "different-formula" | "literal-overwrite" | "blank-gap"
    context: CellRange  # the run (or pair of runs) the cell breaks
    axis: str  # "row" | "column"


def _references(sheet: Sheet, pos, targets: set) -> bool:
    """Whether the formula at ``pos`` points at any of ``targets`` on this sheet."""
    cell = sheet.get(*pos)
    if cell is None or not cell.is_formula:
        return False
    try:
        spans = extract_refs(parse(cell.formula), sheet.name)
    except FormulaSyntaxError:
        return False
    for span in spans:
        if span.book is not None or span.sheet.lower() != sheet.name.lower():
            continue
        top, left, bottom, right = span.bounds
        if any(top <= r <= bottom and left <= c <= right for r, c in targets):
            return True
    return False


def _actual(cell: Cell | None) -> str:
    if cell is None or cell.is_blank:
        return "blank-gap"
    if cell.is_formula:
        return "different-formula"
    return "literal-overwrite"


def find_inconsistencies(sheet: Sheet, ranges=None, min_run: int = DEFAULT_MIN_RUN,
                         forms: dict | None = None) -> list[Inconsistency]:
    """Cells that interrupt or abut a run of ≥ ``min_run`` same-form cells.

    Scanned along every column, then every row:

    * interrupt: the cell sits between two segments of one normal form whose
      combined length is at least ``min_run``; it differs by formula,
      literal or blank.
    * abut: the cell directly precedes or follows such a run and is a
      non-text literal or a lone differing formula.

    Cells that reference the run (totals, subtotals) are never flagged, and
    neither is a literal the run's first or last member feeds from (a seed).
    ``ranges`` is accepted for API symmetry; runs are recomputed from forms.
    """
    if forms is None:
        forms = normal_forms(sheet)
    found: dict = {}
    for axis in ("column", "row"):
        lines = defaultdict(dict)
        for (r, c), nf in forms.items():
            if axis == "column":
                lines[c][r] = nf
            else:
                lines[r][c] = nf
        for fixed, line in sorted(lines.items()):
            for inc in _scan_line(sheet, axis, fixed, line, forms, min_run):
                found.setdefault((inc.cell.row, inc.cell.col), inc)
    return [found[k] for k in sorted(found)]


def _scan_line(sheet, axis, fixed, line: dict, forms: dict, min_run: int):
    def pos(i):
        return (i, fixed) if axis == "column" else (fixed, i)

    def run_from(i, step):
        """Length of the same-form run starting at i and extending by step."""
        nf = line.get(i)
        n = 0
        while nf is not None and line.get(i + n * step) == nf:
            n += 1
        return n

    def context(lo, hi):
        (r1, c1), (r2, c2) = pos(lo), pos(hi)
        return CellRange(sheet.name, r1, c1, r2, c2)

    candidates = set()
    for i in line:
        candidates.update((i - 1, i + 1))
    for p in sorted(candidates):
        if p < 1 or line.get(p) is not None and line.get(p - 1) == line.get(p) == line.get(p + 1):
            continue
        cell = sheet.get(*pos(p))
        own = line.get(p)
        before = line.get(p - 1)
        after = line.get(p + 1)
        # Interrupt: same form on both sides.
        if before is not None and before == after and own != before:
            n_before, n_after = run_from(p - 1, -1), run_from(p + 1, 1)
            if n_before + n_after >= min_run:
                members = {pos(i) for i in range(p - n_before, p)} | {pos(i) for i in range(p + 1, p + 1 + n_after)}
                if not _references(sheet, pos(p), members):
                    r, c = pos(p)
                    yield Inconsistency(CellAddr(sheet.name, r, c), before, _actual(cell),
                                        context(p - n_before, p + n_after), axis)
                continue
        # Abut: a run on one side only.
        for side, step in ((p - 1, -1), (p + 1, 1)):
            nf = line.get(side)
            if nf is None or nf == own:
                continue
            n = run_from(side, step)
            if n < min_run:
                continue
            if cell is None or cell.is_blank:
                continue
            if cell.is_formula:
                if own is not None and (line.get(p - 1) == own or line.get(p + 1) == own):
                    continue  # part of its own consistent run
            elif isinstance(cell.value, str):
                continue  # labels and headers
            members = {pos(side + k * step) for k in range(n)}
            if _references(sheet, pos(p), members):
                continue
            if _references(sheet, pos(side), {pos(p)}):
                continue  # seed value the run starts from
            r, c = pos(p)
            lo, hi = sorted((p, side + (n - 1) * step))
            yield Inconsistency(CellAddr(sheet.name, r, c), nf, _actual(cell), context(lo, hi), axis)
            break
