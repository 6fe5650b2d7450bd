"""Excel formula subset: parsing, printing and structural analysis."""

from .analysis import (
    FormulaMetrics,
    TranslationError,
    extract_refs,
    metrics,
    ref_groups,
    relative_normal_form,
    translate,
)
from .ast import (
    Binary,
    FormulaAst,
    Function,
    Literal,
    Paren,
    Range,
    Ref,
    RefPoint,
    RefSpan,
    Unary,
    walk,
)
from .lexer import EmptyFormula, FormulaSyntaxError, UnbalancedParens
from .parser import parse
from .printer import a1_span, print_formula, to_text

__all__ = [
    "Binary",
    "EmptyFormula",
    "FormulaAst",
    "FormulaMetrics",
    "FormulaSyntaxError",
    "Function",
    "Literal",
    "Paren",
    "Range",
    "Ref",
    "RefPoint",
    "RefSpan",
    "TranslationError",
    "Unary",
    "UnbalancedParens",
    "a1_span",
    "extract_refs",
    "metrics",
    "parse",
    "print_formula",
    "ref_groups",
    "relative_normal_form",
    "to_text",
    "translate",
    "walk",
]
