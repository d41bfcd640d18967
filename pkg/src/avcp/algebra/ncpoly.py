"""Noncommutative polynomials over observable symbols.

A polynomial is a finite map from *words* (tuples of symbol names, read
left to right as an operator product) to scalar coefficients.  The empty
word is the scalar term.  Coefficients are sympy expressions, so they stay
exact for rational input and may carry scalar parameters such as ``hbar``.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import sympy

from ..errors import NonScalarCommutator, UnknownSymbol

ROLES = ("position", "momentum", "angular_momentum", "generic")
_ROLE_RANK = {"position": 0, "generic": 1, "angular_momentum": 1, "momentum": 2}

_PARAMS: dict[str, sympy.Symbol] = {}


def param(name: str) -> sympy.Symbol:
    """The scalar parameter called ``name`` (real-valued, shared instance)."""
    sym = _PARAMS.get(name)
    if sym is None:
        sym = _PARAMS[name] = sympy.Symbol(name, real=True)
    return sym


HBAR = param("hbar")
I = sympy.I


def coeff(value) -> sympy.Expr:
    """Canonical form of a scalar coefficient."""
    if isinstance(value, sympy.Basic):
        return sympy.expand(value)
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, int):
        return sympy.Integer(value)
    if isinstance(value, complex):
        return sympy.expand(sympy.Float(value.real) + sympy.I * sympy.Float(value.imag))
    if isinstance(value, Number):
        return sympy.Float(float(value))
    return sympy.expand(sympy.sympify(value))


def _is_zero(c: sympy.Expr) -> bool:
    return c == 0 or sympy.expand(c) == 0


@dataclass(frozen=True)
class ObservableSymbol:
    name: str
    role: str = "generic"
    time_tag: float | None = None
    frame_tag: str | None = None

    def __post_init__(self):
        if not self.name.isidentifier():
            raise ValueError("symbol name %r is not an identifier" % self.name)
        if self.role not in ROLES:
            raise ValueError("unknown role %r" % self.role)


class CommutationContext:
    """Pairwise commutation facts between observable symbols.

    Parameters
    ----------
    symbols : iterable of ObservableSymbol or str
        The known symbols; declaration order breaks ties in normal ordering.
    commuting_pairs : iterable of (str, str)
        Pairs whose operators commute.  Every symbol commutes with itself;
        undeclared pairs are treated as non-commuting.
    canonical_commutators : mapping (str, str) -> scalar
        ``[a, b]`` for non-commuting pairs with a scalar commutator.  The
        reversed pair is filled in with the opposite sign.
    """

    def __init__(
        self,
        symbols: Iterable[ObservableSymbol | str],
        commuting_pairs: Iterable[tuple[str, str]] = (),
        canonical_commutators: Mapping[tuple[str, str], object] | None = None,
    ):
        table: dict[str, ObservableSymbol] = {}
        for s in symbols:
            sym = s if isinstance(s, ObservableSymbol) else ObservableSymbol(s)
            if sym.name in table:
                raise ValueError("duplicate symbol %r" % sym.name)
            table[sym.name] = sym
        self._symbols = table
        self._index = {name: i for i, name in enumerate(table)}
        pairs = set()
        for a, b in commuting_pairs:
            self._known(a)
            self._known(b)
            pairs.add(frozenset((a, b)))
        self._commuting = frozenset(pairs)
        comm = {}
        for (a, b), value in (canonical_commutators or {}).items():
            self._known(a)
            self._known(b)
            if a == b or frozenset((a, b)) in self._commuting:
                raise ValueError("canonical commutator given for commuting pair (%s, %s)" % (a, b))
            c = coeff(value)
            comm[(a, b)] = c
            comm[(b, a)] = -c
        self._canonical = comm

    @classmethod
    def canonical(cls, pairs: Sequence[tuple[str, str]] = (("x", "px"),), hbar=HBAR) -> "CommutationContext":
        """Context of canonical pairs with ``[q_i, p_j] = i hbar delta_ij``.

        All other pairs commute.
        """
        symbols = []
        for q, p in pairs:
            symbols.append(ObservableSymbol(q, "position"))
            symbols.append(ObservableSymbol(p, "momentum"))
        names = [s.name for s in symbols]
        canon = {(q, p): I * hbar for q, p in pairs}
        canon_keys = {frozenset(k) for k in canon}
        commuting = [
            (a, b)
            for i, a in enumerate(names)
            for b in names[i + 1:]
            if frozenset((a, b)) not in canon_keys
        ]
        return cls(symbols, commuting, canon)

    @classmethod
    def from_operators(cls, binding, rtol: float = 1e-9, roles: Mapping[str, str] | None = None) -> "CommutationContext":
        """Infer commuting pairs numerically from bound operators."""
        roles = roles or {}
        names = list(binding)
        commuting = []
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if operators_commute(binding[a], binding[b], rtol):
                    commuting.append((a, b))
        return cls([ObservableSymbol(n, roles.get(n, "generic")) for n in names], commuting)

    def _known(self, name: str) -> ObservableSymbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise UnknownSymbol("symbol %r is not declared in the context" % name) from None

    @property
    def symbols(self) -> Mapping[str, ObservableSymbol]:
        return MappingProxyType(self._symbols)

    @property
    def commuting_pairs(self) -> frozenset:
        return self._commuting

    @property
    def canonical_commutators(self) -> Mapping[tuple[str, str], sympy.Expr]:
        return MappingProxyType(self._canonical)

    def __contains__(self, name) -> bool:
        return name in self._symbols

    def commute(self, a: str, b: str) -> bool:
        self._known(a)
        self._known(b)
        return a == b or frozenset((a, b)) in self._commuting

    def commutator_scalar(self, a: str, b: str):
        """``[a, b]`` as a scalar, zero for commuting pairs, None if unknown."""
        if self.commute(a, b):
            return sympy.Integer(0)
        return self._canonical.get((a, b))

    def default_order(self) -> list[str]:
        """Position-like symbols first, momenta last, declaration order within a role."""
        return sorted(self._symbols, key=lambda n: (_ROLE_RANK[self._symbols[n].role], self._index[n]))


def operators_commute(a, b, rtol: float = 1e-9) -> bool:
    """Numerical commutation test ``||[A,B]|| <= rtol * max(1, ||A|| ||B||)``."""
    import numpy as np

    ma, mb = a.matrix, b.matrix
    comm = ma @ mb - mb @ ma
    scale = max(1.0, float(np.max(np.abs(ma))) * float(np.max(np.abs(mb))))
    return float(np.max(np.abs(comm))) <= rtol * scale


class NCPolynomial:
    """Immutable noncommutative polynomial; zero coefficients are never stored."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Sequence[str], object] | None = None):
        acc: dict[tuple[str, ...], sympy.Expr] = {}
        for word, c in (terms or {}).items():
            w = tuple(word)
            acc[w] = acc.get(w, sympy.Integer(0)) + coeff(c)
        self._terms = {w: sympy.expand(c) for w, c in acc.items() if not _is_zero(c)}

    @classmethod
    def symbol(cls, name: str) -> "NCPolynomial":
        return cls({(name,): 1})

    @classmethod
    def constant(cls, value) -> "NCPolynomial":
        return cls({(): value})

    @classmethod
    def _raw(cls, terms: dict) -> "NCPolynomial":
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @property
    def terms(self) -> Mapping[tuple[str, ...], sympy.Expr]:
        return MappingProxyType(self._terms)

    def symbols(self) -> set[str]:
        return {s for w in self._terms for s in w}

    def parameters(self) -> set[sympy.Symbol]:
        out = set()
        for c in self._terms.values():
            out |= c.free_symbols
        return out

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_scalar(self) -> bool:
        return all(len(w) == 0 for w in self._terms)

    def scalar_part(self) -> sympy.Expr:
        return self._terms.get((), sympy.Integer(0))

    def sorted_terms(self) -> list[tuple[tuple[str, ...], sympy.Expr]]:
        return sorted(self._terms.items(), key=lambda t: (-len(t[0]), t[0]))

    def subs(self, values: Mapping) -> "NCPolynomial":
        """Substitute scalar parameters in every coefficient."""
        mapping = {(param(k) if isinstance(k, str) else k): v for k, v in values.items()}
        return NCPolynomial({w: c.subs(mapping) for w, c in self._terms.items()})

    def map_coefficients(self, fn) -> "NCPolynomial":
        return NCPolynomial({w: fn(c) for w, c in self._terms.items()})

    def adjoint(self) -> "NCPolynomial":
        """Formal adjoint: reversed words, conjugated coefficients (symbols self-adjoint)."""
        return NCPolynomial({tuple(reversed(w)): sympy.conjugate(c) for w, c in self._terms.items()})

    @staticmethod
    def _coerce(other):
        if isinstance(other, NCPolynomial):
            return other
        if isinstance(other, (Number, sympy.Basic)):
            return NCPolynomial.constant(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        acc = dict(self._terms)
        for w, c in o._terms.items():
            acc[w] = acc.get(w, sympy.Integer(0)) + c
        return NCPolynomial(acc)

    __radd__ = __add__

    def __neg__(self):
        return NCPolynomial._raw({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        acc: dict[tuple[str, ...], sympy.Expr] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in o._terms.items():
                w = w1 + w2
                acc[w] = acc.get(w, sympy.Integer(0)) + c1 * c2
        return NCPolynomial(acc)

    def __rmul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self

    def __truediv__(self, other):
        if isinstance(other, (Number, sympy.Basic)):
            return self * (sympy.Integer(1) / coeff(other))
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = NCPolynomial.constant(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self._terms.keys() != o._terms.keys():
            return False
        return all(_is_zero(self._terms[w] - o._terms[w]) for w in self._terms)

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        from .syntax import format_polynomial

        return "NCPolynomial(%r)" % format_polynomial(self)

    def __str__(self):
        from .syntax import format_polynomial

        return format_polynomial(self)


class Simplicity(NamedTuple):
    simple: bool
    witness: tuple[str, ...] | None = None

    def __bool__(self):
        return self.simple


def is_simple(f: NCPolynomial, ctx: CommutationContext) -> Simplicity:
    """Decide whether no word of ``f`` mixes non-commuting symbols."""
    for s in sorted(f.symbols()):
        ctx._known(s)
    for word, _ in f.sorted_terms():
        distinct = sorted(set(word))
        for i, a in enumerate(distinct):
            for b in distinct[i + 1:]:
                if not ctx.commute(a, b):
                    return Simplicity(False, word)
    return Simplicity(True, None)


def normal_order(f: NCPolynomial, ctx: CommutationContext, order: Sequence[str] | None = None) -> NCPolynomial:
    """Sort every word by ``order`` using scalar commutators.

    Out-of-order neighbours ``a b`` are rewritten to ``b a + [a, b]``; for
    commuting neighbours the commutator is zero.  With scalar commutators the
    rewriting terminates and the result does not depend on the rewrite
    sequence.
    """
    for s in f.symbols():
        ctx._known(s)
    seq = list(order) if order is not None else ctx.default_order()
    rank = {name: i for i, name in enumerate(seq)}
    missing = f.symbols() - rank.keys()
    if missing:
        raise UnknownSymbol("symbols %s missing from the ordering" % sorted(missing))

    out: dict[tuple[str, ...], sympy.Expr] = {}
    stack = list(f.terms.items())
    while stack:
        word, c = stack.pop()
        for i in range(len(word) - 1):
            a, b = word[i], word[i + 1]
            if rank[a] > rank[b]:
                break
        else:
            out[word] = out.get(word, sympy.Integer(0)) + c
            continue
        scalar = ctx.commutator_scalar(a, b)
        if scalar is None:
            raise NonScalarCommutator("no scalar commutator for (%s, %s)" % (a, b))
        stack.append((word[:i] + (b, a) + word[i + 2:], c))
        if not _is_zero(scalar):
            stack.append((word[:i] + word[i + 2:], c * scalar))
    return NCPolynomial(out)
