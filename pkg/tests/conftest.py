from __future__ import annotations

import sys
import time
from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parent / "fixtures"
if str(FIXTURES) not in sys.path:
    sys.path.insert(0, str(FIXTURES))

import build_fixtures  # noqa: E402

from cellguard.workbook import load_workbook  # noqa: E402


@pytest.fixture(scope="session")
def figure4():
    return build_fixtures.figure4_workbook()


@pytest.fixture(scope="session")
def reference():
    return build_fixtures.reference_workbook()


@pytest.fixture(scope="session")
def visual():
    return build_fixtures.visual_workbook()


@pytest.fixture(scope="session")
def fixture_path():
    def get(name: str) -> Path:
        return FIXTURES / f"{name}.json"
    return get


@pytest.fixture(scope="session")
def checked_in():
    """Loader for the checked-in JSON fixtures."""
    return lambda name: load_workbook(FIXTURES / f"{name}.json")


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


class _Criterion:
    def __init__(self, name: str):
        self.name = name
        self.notes: list[str] = []
        self.start = 0.0

    def note(self, text: str) -> None:
        self.notes.append(text)

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "FAIL" if exc_type else "PASS"
        detail = "; ".join(self.notes + [f"{self.elapsed:.2f} s"])
        ACCEPTANCE_LINES.append(f"{status}  {self.name}  ({detail})")
        return False


@pytest.fixture
def criterion():
    """``with criterion("name") as c:`` records one PASS/FAIL line for the run."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
