"""Turning polynomials over observables into operators."""

from __future__ import annotations

from typing import Mapping

import numpy as np
import sympy

from ..errors import BindingMismatch, DimensionMismatch, NotHermitian, NotSimple, ScaleMismatch, UnresolvedParameter
from ..operators import GENERAL, Operator, hermitian
from .ncpoly import HBAR, CommutationContext, NCPolynomial, is_simple, operators_commute, param


def resolve_coefficient(c: sympy.Expr, hbar: float, params: Mapping[str, float] | None = None) -> complex:
    """Numeric value of a coefficient, with ``hbar`` taken from the operators."""
    values = {HBAR: hbar}
    for name, value in (params or {}).items():
        values[param(name)] = value
    out = c.subs(values) if c.free_symbols else c
    if out.free_symbols:
        raise UnresolvedParameter("no value for parameter(s) %s" % ", ".join(sorted(map(str, out.free_symbols))))
    return complex(out)


def _binding_scale(binding: Mapping[str, Operator], names) -> tuple[int, float]:
    ops = [binding[n] for n in names]
    if not ops:
        raise ValueError("a binding is needed to fix dimension and hbar")
    dim, hbar = ops[0].dim, ops[0].hbar
    for op in ops[1:]:
        if op.dim != dim:
            raise DimensionMismatch("bound operators have different dimensions")
        if op.hbar != hbar:
            raise ScaleMismatch("bound operators carry different hbar scales")
    return dim, hbar


def evaluate(f: NCPolynomial, binding: Mapping[str, Operator], params: Mapping[str, float] | None = None) -> np.ndarray:
    """Substitute bound matrices word by word; no simplicity check."""
    names = sorted(f.symbols()) or sorted(binding)
    missing = [n for n in names if n not in binding]
    if missing:
        raise BindingMismatch("no operator bound to %s" % ", ".join(missing))
    dim, hbar = _binding_scale(binding, names)
    out = np.zeros((dim, dim), dtype=complex)
    for word, c in f.sorted_terms():
        value = resolve_coefficient(c, hbar, params)
        m = np.eye(dim, dtype=complex)
        for s in word:
            m = m @ binding[s].matrix
        out += value * m
    return out


def check_binding(ctx: CommutationContext, binding: Mapping[str, Operator], names=None, rtol: float = 1e-9):
    """Raise BindingMismatch if a declared commuting pair fails numerically."""
    names = sorted(names if names is not None else binding)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if ctx.commute(a, b) and not operators_commute(binding[a], binding[b], rtol):
                raise BindingMismatch("%s and %s are declared commuting but their operators do not commute" % (a, b))


def transcribe(
    f: NCPolynomial,
    ctx: CommutationContext,
    binding: Mapping[str, Operator],
    params: Mapping[str, float] | None = None,
) -> Operator:
    """Operator for a simple polynomial of observables.

    Raises NotSimple (with the offending word) when some word mixes
    non-commuting symbols, and BindingMismatch when the bound operators
    contradict a commuting pair declared in ``ctx``.
    """
    verdict = is_simple(f, ctx)
    if not verdict:
        raise NotSimple(verdict.witness)
    names = sorted(f.symbols())
    missing = [n for n in names if n not in binding]
    if missing:
        raise BindingMismatch("no operator bound to %s" % ", ".join(missing))
    check_binding(ctx, binding, names)
    m = evaluate(f, binding, params)
    hbar = _binding_scale(binding, names or sorted(binding))[1]
    scale = max(1.0, float(np.max(np.abs(m))))
    if float(np.max(np.abs(m - m.conj().T))) <= 1e-10 * scale:
        return hermitian(m, hbar)
    return Operator(m, GENERAL, hbar)


def hermitize(
    f1: NCPolynomial,
    f2: NCPolynomial,
    binding: Mapping[str, Operator],
    params: Mapping[str, float] | None = None,
) -> Operator:
    """Symmetrized product ``(f1(A) f2(B) + f2(B) f1(A)) / 2``.

    This is the Hermitization prescription for products of non-commuting
    observables.  It is known to be inconsistent under iteration and is
    only used by the demonstrations.
    """
    if len(f1.symbols()) > 1 or len(f2.symbols()) > 1:
        raise ValueError("hermitize expects f1 and f2 to be univariate")
    m1 = evaluate(f1, binding, params)
    m2 = evaluate(f2, binding, params)
    hbar = _binding_scale(binding, sorted(f1.symbols() | f2.symbols()) or sorted(binding))[1]
    m = (m1 @ m2 + m2 @ m1) / 2
    try:
        return hermitian(m, hbar)
    except NotHermitian:
        return Operator(m, GENERAL, hbar)
