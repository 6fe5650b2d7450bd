from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..addr import CellAddr, Location, format_location, location_contains
from ..values import Value, same_value


class DetectorKind(enum.Enum):
    """Detectors in canonical order; values are the serialized identifiers."""

    FIXED_NUMBERS = "fixed-numbers"
    UNUSUAL_RANGE = "unusual-range"
    JEALOUSY = "jealousy"
    MULTI_FUNCTION = "multi-function"
    MANY_REF_GROUPS = "many-ref-groups"
    LONG_CHAIN = "long-chain"
    COPY_PASTE = "copy-paste"
    EMPTY_REFERENCE = "empty-reference"
    EXCEL_ERROR = "excel-error"
    CIRCLE_CHAIN = "circle-chain"

    @property
    def order(self) -> int:
        return list(DetectorKind).index(self)

    @property
    def title(self) -> str:
        return _TITLES[self]


_TITLES = {
    DetectorKind.FIXED_NUMBERS: "Containing Fixed Numbers",
    DetectorKind.UNUSUAL_RANGE: "Unusual range",
    DetectorKind.JEALOUSY: "Jealousy detected",
    DetectorKind.MULTI_FUNCTION: "Multiple functions in one formula",
    DetectorKind.MANY_REF_GROUPS: "Referencing many different cell groups",
    DetectorKind.LONG_CHAIN: "Long chain of formulas",
    DetectorKind.COPY_PASTE: "Copy-pasting",
    DetectorKind.EMPTY_REFERENCE: "Empty reference",
    DetectorKind.EXCEL_ERROR: "Excel error",
    DetectorKind.CIRCLE_CHAIN: "Circle Chain",
}


class RiskDegree(enum.IntEnum):
    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def weight(self) -> int:
        return {1: 1, 2: 3, 3: 9}[self.value]

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, text: str) -> RiskDegree:
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown risk degree {text!r}") from None


class ErrorCategory(enum.Enum):
    REFERENCE = "Reference"
    FINANCIAL_FORMULA = "FinancialFormula"
    EXCEL_LOGIC = "ExcelLogic"
    INTERFACE = "Interface"
    INPUT = "Input"
    USER_RELATED = "UserRelated"
    CONTROL_ENVIRONMENT = "ControlEnvironment"

    @property
    def number(self) -> int:
        """Position in the taxonomy, 1 to 7 (``cat<k>`` on the command line)."""
        return list(ErrorCategory).index(self) + 1

    @classmethod
    def from_number(cls, k: int) -> ErrorCategory:
        if not 1 <= k <= 7:
            raise ValueError(f"error category must be 1..7, got {k}")
        return list(cls)[k - 1]

    @classmethod
    def parse(cls, text: str) -> ErrorCategory:
        t = text.strip()
        if t.lower().startswith("cat") and t[3:].isdigit():
            return cls.from_number(int(t[3:]))
        for c in cls:
            if t in (c.value, c.name) or t.lower() == c.value.lower():
                return c
        raise ValueError(f"unknown error category {text!r}")


# Sub-types that decide the taxonomy category of two detectors.
LITERAL_OVERWRITE = "literal-overwrite"
REFERENCE = "reference"
EXTERNAL = "external"
INTERNAL = "internal"

_FIXED_CATEGORY = {
    DetectorKind.FIXED_NUMBERS: ErrorCategory.INPUT,
    DetectorKind.JEALOUSY: ErrorCategory.EXCEL_LOGIC,
    DetectorKind.MULTI_FUNCTION: ErrorCategory.EXCEL_LOGIC,
    DetectorKind.MANY_REF_GROUPS: ErrorCategory.EXCEL_LOGIC,
    DetectorKind.LONG_CHAIN: ErrorCategory.EXCEL_LOGIC,
    DetectorKind.COPY_PASTE: ErrorCategory.USER_RELATED,
    DetectorKind.EXCEL_ERROR: ErrorCategory.EXCEL_LOGIC,
    DetectorKind.CIRCLE_CHAIN: ErrorCategory.EXCEL_LOGIC,
}


def category_for(kind: DetectorKind, subtype: str | None = None) -> ErrorCategory:
    if kind is DetectorKind.UNUSUAL_RANGE:
        return ErrorCategory.CONTROL_ENVIRONMENT if subtype == LITERAL_OVERWRITE else ErrorCategory.REFERENCE
    if kind is DetectorKind.EMPTY_REFERENCE:
        return ErrorCategory.INTERFACE if subtype == EXTERNAL else ErrorCategory.REFERENCE
    return _FIXED_CATEGORY[kind]


def subtype_for(kind: DetectorKind, category: ErrorCategory) -> str | None:
    """Inverse of :func:`category_for` for the two detectors with sub-types."""
    if kind is DetectorKind.UNUSUAL_RANGE:
        return LITERAL_OVERWRITE if category is ErrorCategory.CONTROL_ENVIRONMENT else REFERENCE
    if kind is DetectorKind.EMPTY_REFERENCE:
        return EXTERNAL if category is ErrorCategory.INTERFACE else INTERNAL
    return None


@dataclass(frozen=True, eq=False)
class RiskFinding:
    kind: DetectorKind
    degree: RiskDegree
    location: Location
    details: str
    current_value: Value
    suggestion: str
    subtype: str | None = None
    category: ErrorCategory | None = None

    def __post_init__(self):
        if not self.suggestion:
            raise ValueError("a finding needs a suggestion")
        if not self.location:
            raise ValueError("a finding needs a location")
        object.__setattr__(self, "location", tuple(self.location))
        if self.category is None:
            object.__setattr__(self, "category", category_for(self.kind, self.subtype))

    @property
    def location_text(self) -> str:
        return format_location(self.location)

    def contains(self, addr: CellAddr) -> bool:
        return location_contains(self.location, addr)

    @property
    def key(self) -> tuple[str, str]:
        """Identity used by the baseline-diff rule."""
        return self.kind.value, self.location_text

    def _cmp_tuple(self):
        return (self.kind, self.degree, self.location, self.details, self.suggestion,
                self.subtype, self.category)

    def __eq__(self, other):
        if not isinstance(other, RiskFinding):
            return NotImplemented
        if self._cmp_tuple() != other._cmp_tuple():
            return False
        a, b = self.current_value, other.current_value
        return (a is None and b is None) or same_value(a, b)

    def __hash__(self):
        return hash(self._cmp_tuple())


_THRESHOLDS = (
    "jealousy_min_refs",
    "multi_function_threshold",
    "many_ref_groups_threshold",
    "long_chain_threshold",
    "copy_block_min_cells",
    "min_run",
    "expansion_cap",
)


@dataclass(frozen=True)
class AnalyzerConfig:
    fixed_number_allowlist: frozenset = frozenset({0.0, 1.0, -1.0})
    jealousy_min_refs: int = 4
    jealousy_fraction: float = 0.5
    multi_function_threshold: int = 4
    many_ref_groups_threshold: int = 6
    long_chain_threshold: int = 8
    copy_block_min_cells: int = 6
    degree_overrides: dict = field(default_factory=dict)  # DetectorKind -> RiskDegree
    min_run: int = 3
    expansion_cap: int = 10_000
    sheet_orange_score: float = 0.1
    sheet_red_score: float = 0.5

    def __post_init__(self):
        for name in _THRESHOLDS:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
        if not 0 < self.jealousy_fraction <= 1:
            raise ValueError(f"jealousy_fraction must be in (0, 1], got {self.jealousy_fraction!r}")
        if not 0 <= self.sheet_orange_score <= self.sheet_red_score:
            raise ValueError("sheet scores need 0 <= orange <= red")
        object.__setattr__(self, "fixed_number_allowlist",
                           frozenset(float(x) for x in self.fixed_number_allowlist))
        object.__setattr__(self, "degree_overrides", {
            (k if isinstance(k, DetectorKind) else DetectorKind(k)):
                (v if isinstance(v, RiskDegree) else RiskDegree.parse(v))
            for k, v in self.degree_overrides.items()
        })

    def degree(self, kind: DetectorKind, default: RiskDegree) -> RiskDegree:
        return self.degree_overrides.get(kind, default)

    @classmethod
    def from_mapping(cls, data: dict) -> AnalyzerConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> AnalyzerConfig:
        """Read a JSON or TOML file whose keys mirror the field names."""
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text)
        return cls.from_mapping(data)

    def to_mapping(self) -> dict:
        return {
            "fixed_number_allowlist": sorted(self.fixed_number_allowlist),
            "jealousy_min_refs": self.jealousy_min_refs,
            "jealousy_fraction": self.jealousy_fraction,
            "multi_function_threshold": self.multi_function_threshold,
            "many_ref_groups_threshold": self.many_ref_groups_threshold,
            "long_chain_threshold": self.long_chain_threshold,
            "copy_block_min_cells": self.copy_block_min_cells,
            "degree_overrides": {k.value: v.name.lower() for k, v in sorted(
                self.degree_overrides.items(), key=lambda kv: kv[0].order)},
            "min_run": self.min_run,
            "expansion_cap": self.expansion_cap,
            "sheet_orange_score": self.sheet_orange_score,
            "sheet_red_score": self.sheet_red_score,
        }
