import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from avcp.algebra import HBAR, I, CommutationContext, NCPolynomial, evaluate, is_simple, normal_order, param
from avcp.algebra.syntax import Add, Mul, Neg, Num, Pow, Sym, expand, parse_polynomial
from avcp.errors import NonScalarCommutator, UnknownSymbol
from avcp.operators import StateVector
from avcp.representations import DEFAULT_FAMILY, grid_representation

A, B, C = (NCPolynomial.symbol(s) for s in "ABC")
X, P = NCPolynomial.symbol("x"), NCPolynomial.symbol("px")
CANON = CommutationContext.canonical()


def poly(text, obs="ABC"):
    return parse_polynomial(text, observables=set(obs) if isinstance(obs, str) else obs)


# -- storage -----------------------------------------------------------------


def test_zero_terms_are_not_stored():
    p = NCPolynomial({("A",): 1, ("B",): 0}) + A - 2 * A
    assert p.is_zero()
    assert dict(p.terms) == {}


def test_empty_word_is_the_scalar_term():
    p = NCPolynomial.constant(3) + A
    assert p.scalar_part() == 3
    assert not p.is_scalar()
    assert NCPolynomial.constant(sympy.Rational(1, 2)).is_scalar()


def test_adjoint_reverses_words_and_conjugates():
    p = NCPolynomial({("A", "B"): 2 + 3 * I})
    assert p.adjoint() == NCPolynomial({("B", "A"): 2 - 3 * I})


# -- expansion ---------------------------------------------------------------


def test_square_of_sum_keeps_order():
    assert (A + B) * (A + B) == NCPolynomial({("A", "A"): 1, ("A", "B"): 1, ("B", "A"): 1, ("B", "B"): 1})


def test_distribution_cancels():
    assert A * (B + C) - A * B == A * C


def test_expand_from_text():
    assert poly("(A+B)^2") == (A + B) ** 2
    assert poly("A*(B+C) - A*B") == A * C


def _naive(tree):
    """List of (word, coefficient) without any merging."""
    if isinstance(tree, Num):
        return [((), tree.value)]
    if isinstance(tree, Sym):
        return [((tree.name,), sympy.Integer(1))]
    if isinstance(tree, Neg):
        return [(w, -c) for w, c in _naive(tree.child)]
    if isinstance(tree, Add):
        return [t for child in tree.children for t in _naive(child)]
    if isinstance(tree, Mul):
        out = [((), sympy.Integer(1))]
        for child in tree.children:
            out = [(w1 + w2, c1 * c2) for w1, c1 in out for w2, c2 in _naive(child)]
        return out
    if isinstance(tree, Pow):
        return _naive(Mul((tree.base,) * tree.exponent)) if tree.exponent else [((), sympy.Integer(1))]
    raise TypeError(tree)


leaves = st.one_of(
    st.sampled_from("ABC").map(Sym),
    st.integers(min_value=-3, max_value=3).map(lambda k: Num(sympy.Integer(k))),
)


def _trees(children):
    return st.one_of(
        st.lists(children, min_size=2, max_size=3).map(lambda c: Add(tuple(c))),
        st.lists(children, min_size=2, max_size=3).map(lambda c: Mul(tuple(c))),
        children.map(Neg),
        st.tuples(children, st.integers(min_value=0, max_value=2)).map(lambda t: Pow(*t)),
    )


trees = st.recursive(leaves, _trees, max_leaves=8)


@settings(max_examples=150)
@given(trees)
def test_expand_matches_naive_term_by_term_oracle(tree):
    merged = {}
    for w, c in _naive(tree):
        merged[w] = merged.get(w, 0) + c
    oracle = {w: c for w, c in merged.items() if sympy.expand(c) != 0}
    got = expand(tree)
    assert set(got.terms) == set(oracle)
    for w, c in oracle.items():
        assert sympy.expand(got.terms[w] - c) == 0


# -- simplicity --------------------------------------------------------------


def test_sum_of_functions_of_noncommuting_is_simple():
    ctx = CommutationContext(["A", "B"])
    assert is_simple(poly("A^2 - 3*A + 2*B^3"), ctx)


def test_product_of_noncommuting_is_not_simple():
    ctx = CommutationContext(["A", "B"])
    verdict = is_simple(A * B, ctx)
    assert not verdict
    assert verdict.witness == ("A", "B")


def test_product_of_commuting_is_simple():
    ctx = CommutationContext(["A", "B"], commuting_pairs=[("A", "B")])
    assert is_simple(A * B + B * A * A, ctx)


def test_pb_of_cubics_is_not_simple():
    gamma = param("gamma")
    f = 9 * gamma * X * X * P * P
    verdict = is_simple(f, CANON)
    assert not verdict
    assert verdict.witness == ("x", "x", "px", "px")


def test_simplicity_on_expansion_not_tree():
    ctx = CommutationContext(["A", "B"])
    # A*B - A*B cancels, leaving a simple polynomial
    assert is_simple(poly("A*B + A - A*B"), ctx)


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol):
        is_simple(C, CommutationContext(["A"]))


def test_context_invariants():
    ctx = CommutationContext(["A", "B"], canonical_commutators={("A", "B"): I})
    assert ctx.commute("A", "A")
    assert ctx.commutator_scalar("B", "A") == -I
    with pytest.raises(ValueError):
        CommutationContext(["A", "B"], [("A", "B")], {("A", "B"): I})
    with pytest.raises(ValueError):
        CommutationContext(["A", "A"])


# -- normal ordering ---------------------------------------------------------


def test_single_swap():
    assert normal_order(P * X, CANON) == X * P - I * HBAR


def test_p2x2_hand_rewrite():
    expected = X * X * P * P - 4 * I * HBAR * X * P - 2 * HBAR**2
    assert normal_order(P * P * X * X, CANON) == expected


def test_ordered_word_unchanged():
    f = X * X * P + 3 * X
    assert normal_order(f, CANON) == f


def test_custom_order():
    assert normal_order(X * P, CANON, order=["px", "x"]) == P * X + I * HBAR


def test_non_scalar_commutator_is_refused():
    ctx = CommutationContext(["A", "B"])
    with pytest.raises(NonScalarCommutator):
        normal_order(B * A, ctx, order=["A", "B"])


def test_commuting_symbols_reorder_freely():
    ctx = CommutationContext(["A", "B"], [("A", "B")])
    assert normal_order(B * A * B, ctx, order=["A", "B"]) == A * B * B


@pytest.fixture(scope="module")
def grid():
    return grid_representation(256, 20.0, 0.8)


def _grid_mean(f, grid, v):
    m = evaluate(f, grid.binding(), params={})
    return np.vdot(v.amplitudes, m @ v.amplitudes)


def test_p2x2_grid_oracle(grid):
    lhs = P * P * X * X
    rhs = normal_order(lhs, CANON)
    for v in DEFAULT_FAMILY.states(grid):
        a, b = _grid_mean(lhs, grid, v), _grid_mean(rhs, grid, v)
        assert abs(a - b) < 1e-8 * max(1.0, abs(a))


words = st.lists(st.sampled_from(["x", "px"]), min_size=0, max_size=4).map(tuple)
nc_polys = st.dictionaries(words, st.integers(min_value=-4, max_value=4), max_size=4).map(NCPolynomial)


@given(nc_polys)
def test_normal_order_is_idempotent(f):
    once = normal_order(f, CANON)
    assert normal_order(once, CANON) == once
    for word in once.terms:
        assert list(word) == sorted(word, key=lambda s: s == "px")


@settings(max_examples=30, deadline=None)
@given(nc_polys, st.integers(min_value=0, max_value=26))
def test_normal_order_agrees_with_grid_matrices(grid, f, k):
    v = DEFAULT_FAMILY.states(grid)[k]
    ordered = normal_order(f, CANON)
    a, b = _grid_mean(f, grid, v), _grid_mean(ordered, grid, v)
    assert abs(a - b) < 1e-8 * max(1.0, abs(a))


def test_evaluate_binding_sanity(grid):
    v = StateVector.normalized(np.exp(-((grid.positions / 2.0) ** 2)))
    assert _grid_mean(X, grid, v) == pytest.approx(0.0, abs=1e-12)
