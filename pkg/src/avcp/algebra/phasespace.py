"""Commutative phase-space polynomials and the Poisson bracket."""

from __future__ import annotations

from typing import Sequence

import sympy

from .ncpoly import NCPolynomial, param
from .syntax import expand, parse


class PhaseSpacePolynomial:
    """A commutative polynomial in canonical pairs ``(q_i, p_i)``.

    Coefficients may contain scalar parameters (``hbar``, ``gamma``, ...).
    The stored expression is fully expanded, so like terms are merged.
    """

    __slots__ = ("expr", "pairs")

    def __init__(self, expr, pairs: Sequence[tuple[str, str]] = (("x", "px"),)):
        self.pairs = tuple((str(q), str(p)) for q, p in pairs)
        names = [n for pair in self.pairs for n in pair]
        if len(set(names)) != len(names):
            raise ValueError("canonical coordinates must be distinct")
        self.expr = sympy.expand(sympy.sympify(expr))
        stray = {s for s in self.expr.free_symbols if s.name in names and s != param(s.name)}
        if stray:
            raise ValueError("coordinates must be created with avcp.algebra.param")

    @classmethod
    def parse(cls, text: str, pairs: Sequence[tuple[str, str]] = (("x", "px"),)) -> "PhaseSpacePolynomial":
        """Read the textual syntax; products commute here."""
        coords = {n for pair in pairs for n in pair}
        tree = parse(text, observables=coords)
        return cls(_commutative(tree), pairs)

    @property
    def coordinates(self) -> list[sympy.Symbol]:
        return [param(n) for pair in self.pairs for n in pair]

    def _wrap(self, expr) -> "PhaseSpacePolynomial":
        return PhaseSpacePolynomial(expr, self.pairs)

    def _other(self, other):
        if isinstance(other, PhaseSpacePolynomial):
            if other.pairs != self.pairs:
                raise ValueError("phase-space polynomials over different coordinates")
            return other.expr
        return sympy.sympify(other)

    def __add__(self, other):
        return self._wrap(self.expr + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.expr - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.expr)

    def __neg__(self):
        return self._wrap(-self.expr)

    def __mul__(self, other):
        return self._wrap(self.expr * self._other(other))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return self._wrap(self.expr ** n)

    def __eq__(self, other):
        if isinstance(other, PhaseSpacePolynomial) and other.pairs != self.pairs:
            return False
        return sympy.expand(self.expr - self._other(other)) == 0

    def __hash__(self):
        return hash((self.pairs, self.expr))

    def __repr__(self):
        return "PhaseSpacePolynomial(%s)" % self.expr

    def diff(self, name: str) -> "PhaseSpacePolynomial":
        return self._wrap(sympy.diff(self.expr, param(name)))

    def monomials(self) -> list[tuple[dict[str, int], sympy.Expr]]:
        """``(exponents, coefficient)`` pairs in a deterministic order."""
        coords = self.coordinates
        if self.expr == 0:
            return []
        poly = sympy.Poly(self.expr, *coords)
        out = []
        for exps, c in sorted(poly.terms(), reverse=True):
            out.append(({s.name: e for s, e in zip(coords, exps) if e}, c))
        return out

    def to_ncpolynomial(self, order: Sequence[str] | None = None) -> NCPolynomial:
        """Noncommutative polynomial with each monomial written in ``order``.

        The default order puts every position before every momentum.
        """
        if order is None:
            order = [q for q, _ in self.pairs] + [p for _, p in self.pairs]
        terms = {}
        for exps, c in self.monomials():
            word = tuple(n for n in order for _ in range(exps.get(n, 0)))
            terms[word] = terms.get(word, 0) + c
        return NCPolynomial(terms)


def _commutative(tree):
    """Sympy expression of a parse tree, letting every factor commute."""
    poly = expand(tree)
    total = sympy.Integer(0)
    for word, c in poly.terms.items():
        term = c
        for s in word:
            term = term * param(s)
        total += term
    return total


def poisson_bracket(f: PhaseSpacePolynomial, h: PhaseSpacePolynomial) -> PhaseSpacePolynomial:
    """``{F, H} = sum_i dF/dq_i dH/dp_i - dH/dq_i dF/dp_i``."""
    if f.pairs != h.pairs:
        raise ValueError("brackets need a shared set of canonical coordinates")
    total = sympy.Integer(0)
    for q, p in f.pairs:
        qs, ps = param(q), param(p)
        total += sympy.diff(f.expr, qs) * sympy.diff(h.expr, ps) - sympy.diff(h.expr, qs) * sympy.diff(f.expr, ps)
    return PhaseSpacePolynomial(total, f.pairs)
