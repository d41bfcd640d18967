"""Textual expression syntax, expression trees and the polynomial printer.

Grammar (whitespace and newlines are insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := atom ("^" INTEGER)?
    atom    := NUMBER | IDENT | "(" expr ")"

``i`` and ``hbar`` are reserved scalars.  Any other identifier is an
observable symbol unless it is listed as a scalar parameter (or, when an
explicit observable set is supplied, unless it is missing from that set).
Division is only allowed by scalar expressions.  Products never commute:
``x*px`` and ``px*x`` are different words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import sympy
from sympy.printing.str import StrPrinter

from ..errors import ParseError
from .ncpoly import HBAR, NCPolynomial, param

RESERVED = {"i": sympy.I, "hbar": HBAR}


class Node:
    """Base class of expression-tree nodes."""


@dataclass(frozen=True)
class Num(Node):
    value: sympy.Expr


@dataclass(frozen=True)
class Sym(Node):
    name: str


@dataclass(frozen=True)
class Par(Node):
    name: str


@dataclass(frozen=True)
class Add(Node):
    children: tuple


@dataclass(frozen=True)
class Mul(Node):
    children: tuple


@dataclass(frozen=True)
class Div(Node):
    numerator: Node
    denominator: Node


@dataclass(frozen=True)
class Neg(Node):
    child: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("unexpected character %r" % text[pos], line, col)
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind != "ws":
                toks.append(_Tok(kind, m.group(), line, col))
            col += len(m.group())
        pos = m.end()
    toks.append(_Tok("end", "", line, col))
    return toks


class _Parser:
    def __init__(self, text, observables, params):
        self.toks = _tokenize(text)
        self.pos = 0
        self.observables = None if observables is None else set(observables)
        self.params = set(params or ())

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.take()
        if tok.text != text:
            raise ParseError("expected %r, found %r" % (text, tok.text or "end of input"), tok.line, tok.column)
        return tok

    def parse(self):
        if self.peek().kind == "end":
            tok = self.peek()
            raise ParseError("empty expression", tok.line, tok.column)
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError("unexpected %r" % tok.text, tok.line, tok.column)
        return node

    def expr(self):
        terms = [self.term()]
        while self.peek().text in ("+", "-"):
            op = self.take().text
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self):
        node = self.unary()
        factors = [node]
        while self.peek().text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            if op == "*":
                factors.append(rhs)
            else:
                lhs = factors[0] if len(factors) == 1 else Mul(tuple(factors))
                factors = [Div(lhs, rhs)]
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def unary(self):
        tok = self.peek()
        if tok.text == "-":
            self.take()
            return Neg(self.unary())
        if tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            tok = self.take()
            if tok.kind != "num" or not tok.text.isdigit():
                raise ParseError("exponent must be a non-negative integer", tok.line, tok.column)
            return Pow(base, int(tok.text))
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            if re.fullmatch(r"\d+", tok.text):
                return Num(sympy.Integer(int(tok.text)))
            return Num(sympy.Float(float(tok.text)))
        if tok.kind == "ident":
            name = tok.text
            if name in RESERVED or name in self.params:
                return Par(name)
            if self.observables is not None and name not in self.observables:
                return Par(name)
            return Sym(name)
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError("unexpected %r" % (tok.text or "end of input"), tok.line, tok.column)


def parse(text: str, observables: Iterable[str] | None = None, params: Iterable[str] | None = None) -> Node:
    """Parse ``text`` into an expression tree."""
    return _Parser(text, observables, params).parse()


def expand(tree: Node) -> NCPolynomial:
    """Distribute products over sums, keeping word order."""
    if isinstance(tree, Num):
        return NCPolynomial.constant(tree.value)
    if isinstance(tree, Sym):
        return NCPolynomial.symbol(tree.name)
    if isinstance(tree, Par):
        return NCPolynomial.constant(RESERVED.get(tree.name) if tree.name in RESERVED else param(tree.name))
    if isinstance(tree, Add):
        out = NCPolynomial()
        for child in tree.children:
            out = out + expand(child)
        return out
    if isinstance(tree, Mul):
        out = NCPolynomial.constant(1)
        for child in tree.children:
            out = out * expand(child)
        return out
    if isinstance(tree, Neg):
        return -expand(tree.child)
    if isinstance(tree, Pow):
        return expand(tree.base) ** tree.exponent
    if isinstance(tree, Div):
        den = expand(tree.denominator)
        if not den.is_scalar() or den.is_zero():
            raise ParseError("division by a non-scalar or zero expression")
        return expand(tree.numerator) / den.scalar_part()
    raise TypeError("not an expression node: %r" % (tree,))


def parse_polynomial(text: str, observables: Iterable[str] | None = None, params: Iterable[str] | None = None) -> NCPolynomial:
    return expand(parse(text, observables, params))


class _CoefficientPrinter(StrPrinter):
    def _print_ImaginaryUnit(self, expr):
        return "i"

    def _print_Float(self, expr):
        return repr(float(expr))

    def _print_Pow(self, expr, rational=False):
        out = super()._print_Pow(expr, rational)
        return out.replace("**", "^")


_printer = _CoefficientPrinter({"order": "lex"})


def format_coefficient(c: sympy.Expr) -> str:
    return _printer.doprint(c).replace("**", "^")


def _format_word(word) -> str:
    parts = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        n = j - i
        parts.append(word[i] if n == 1 else "%s^%d" % (word[i], n))
        i = j
    return "*".join(parts)


def format_polynomial(p: NCPolynomial) -> str:
    """Render ``p`` in the textual syntax; ``parse_polynomial`` inverts it."""
    pieces = []
    for word, c in p.sorted_terms():
        text = format_coefficient(c)
        negative = False
        if isinstance(c, sympy.Add):
            text = "(%s)" % text
        elif text.startswith("-"):
            negative, text = True, text[1:]
        if word:
            if text == "1":
                body = _format_word(word)
            else:
                body = "%s*%s" % (text, _format_word(word))
        else:
            body = text
        pieces.append((negative, body))
    if not pieces:
        return "0"
    neg, body = pieces[0]
    out = ("-" + body) if neg else body
    for neg, body in pieces[1:]:
        out += (" - " if neg else " + ") + body
    return out
