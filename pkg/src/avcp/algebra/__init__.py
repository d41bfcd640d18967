"""Noncommutative symbolic algebra over observable symbols."""

from .ncpoly import (
    HBAR,
    I,
    CommutationContext,
    NCPolynomial,
    ObservableSymbol,
    Simplicity,
    is_simple,
    normal_order,
    operators_commute,
    param,
)
from .phasespace import PhaseSpacePolynomial, poisson_bracket
from .syntax import expand, format_polynomial, parse, parse_polynomial
from .transcription import evaluate, hermitize, resolve_coefficient, transcribe

__all__ = [
    "HBAR",
    "I",
    "CommutationContext",
    "NCPolynomial",
    "ObservableSymbol",
    "PhaseSpacePolynomial",
    "Simplicity",
    "evaluate",
    "expand",
    "format_polynomial",
    "hermitize",
    "is_simple",
    "normal_order",
    "operators_commute",
    "param",
    "parse",
    "parse_polynomial",
    "poisson_bracket",
    "resolve_coefficient",
    "transcribe",
]
