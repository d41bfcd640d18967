"""Acceptance criteria AC1-AC9.

Each test carries ``@pytest.mark.acceptance(id, title)``; ``conftest.py``
prints one PASS/FAIL line per criterion at the end of the run.
"""

import numpy as np
import pytest
import sympy

from avcp.algebra import HBAR, I, CommutationContext, normal_order, param, parse_polynomial, transcribe
from avcp.arrangements import (
    NotRepresentable,
    Representable,
    analytic_expected_output,
    arrange,
    arrangement_functional,
    build_quantum_counterpart,
    monte_carlo_samples,
    representing_operator,
    summarize,
)
from avcp.checks import (
    PB_GRID_TRIPLES,
    PB_MATRIX_TRIPLES,
    check_angular_suite,
    check_bloch_rotation,
    check_canonical_commutator,
    check_displacement_relations,
    check_ehrenfest_free,
    check_minimal_coupling,
    check_pb_suite,
    check_rotation_group_identity,
    commuting_pair,
    hermitization_gap,
    random_soundness_case,
    spins_up_to,
)
from avcp.cli import main
from avcp.demos import PUBLISHED_PB_GAP, demo_intro_spin, demo_pb_counterexample, pauli_pair, pb_counterexample_polynomials
from avcp.errors import NotSimple
from avcp.operators import expectation, identity, random_hermitian
from avcp.representations import DEFAULT_FAMILY, grid_representation, spin_operators
from avcp.scenario import shipped_scenarios

acceptance = pytest.mark.acceptance


def maxabs(m):
    return float(np.max(np.abs(m)))


# -- AC1 ---------------------------------------------------------------------


@acceptance("AC1", "spin-1/2 sum: outputs in {+hbar, 0, -hbar}, operator outcomes +-hbar/sqrt2")
@pytest.mark.parametrize("hbar", [1.0, 0.7])
def test_ac1_intro_counterexample(hbar):
    rep = demo_intro_spin(n_states=10, n_runs=100_000, seed=2024, hbar=hbar)
    assert len(rep.data["states"]) == 10
    assert set(rep.data["support"]) <= {hbar, 0.0, -hbar}
    # sum outcomes from an independent eigvalsh of the Pauli matrices
    sx = np.array([[0, 1], [1, 0]]) * hbar / 2
    sz = np.diag([1.0, -1.0]) * hbar / 2
    outcomes = np.linalg.eigvalsh(sx + sz)
    assert np.max(np.abs(outcomes - [-hbar / np.sqrt(2), hbar / np.sqrt(2)])) <= 1e-12
    assert np.max(np.abs(np.array(rep.data["operator_outcomes"]) - outcomes)) <= 1e-12
    for row in rep.data["states"]:
        assert abs(row["sampled"] - row["operator"]) <= 4 * row["stderr"]
        assert row["analytic"] == pytest.approx(row["operator"], abs=1e-12)
    assert rep.flags == []


# -- AC2 ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def soundness_cases():
    rng = np.random.default_rng(20240601)
    return [random_soundness_case(rng) for _ in range(100)]


@acceptance("AC2", "AVCP soundness: arrangement mean equals <f^>")
def test_ac2_analytic_mean_matches_operator(soundness_cases):
    dims = set()
    for arr, binding, v in soundness_cases:
        q = build_quantum_counterpart(arr, binding)
        ctx = CommutationContext.from_operators(binding)
        op = transcribe(arr.combine, ctx, binding)
        dims.add(op.dim)
        assert abs(analytic_expected_output(q, v) - expectation(op, v)) <= 1e-9
    assert dims == {2, 3, 4, 5, 6}


@acceptance("AC2", "AVCP soundness: arrangement mean equals <f^>")
def test_ac2_monte_carlo_agrees(soundness_cases):
    hits = 0
    for k, (arr, binding, v) in enumerate(soundness_cases):
        q = build_quantum_counterpart(arr, binding)
        mean, stderr = summarize(monte_carlo_samples(q, v, 100_000, 1000 + k))
        hits += abs(mean - analytic_expected_output(q, v)) <= 4 * stderr
    assert hits >= 99


# -- AC3 ---------------------------------------------------------------------


@acceptance("AC3", "function, sum and product rules; refusal iff non-commuting")
def test_ac3_rules_are_matrix_identities():
    rng = np.random.default_rng(3)
    for _ in range(50):
        dim = int(rng.integers(2, 7))
        a, b = commuting_pair(dim, rng)
        c = random_hermitian(dim, rng)
        binding = {"a": a, "b": b, "c": c}
        ctx = CommutationContext.from_operators(binding)
        am, bm, cm = a.matrix, b.matrix, c.matrix
        # function rule against the eigenbasis formula
        w, u = np.linalg.eigh(am)
        expect = (u * (w**3 - 2 * w + 0.5)) @ u.conj().T
        got = transcribe(parse_polynomial("a^3 - 2*a + 0.5"), ctx, binding).matrix
        assert maxabs(got - expect) <= 1e-10 * max(1.0, maxabs(expect))
        got = transcribe(parse_polynomial("a + c"), ctx, binding).matrix
        assert maxabs(got - am - cm) <= 1e-10 * max(1.0, maxabs(am + cm))
        got = transcribe(parse_polynomial("a*b"), ctx, binding).matrix
        assert maxabs(got - am @ bm) <= 1e-10 * max(1.0, maxabs(am @ bm))


@acceptance("AC3", "function, sum and product rules; refusal iff non-commuting")
def test_ac3_product_refused_exactly_when_noncommuting():
    rng = np.random.default_rng(33)
    refused_seen = accepted_seen = 0
    for trial in range(60):
        dim = int(rng.integers(2, 7))
        if trial % 2:
            a, b = commuting_pair(dim, rng)
        else:
            a, b = random_hermitian(dim, rng), random_hermitian(dim, rng)
        comm = a.matrix @ b.matrix - b.matrix @ a.matrix
        noncommuting = np.linalg.norm(comm, 2) > 1e-9 * np.linalg.norm(a.matrix, 2) * np.linalg.norm(b.matrix, 2)
        binding = {"a": a, "b": b}
        try:
            transcribe(parse_polynomial("a*b"), CommutationContext.from_operators(binding), binding)
        except NotSimple as exc:
            assert noncommuting
            assert set(exc.witness) == {"a", "b"}
            refused_seen += 1
        else:
            assert not noncommuting
            accepted_seen += 1
    assert refused_seen == accepted_seen == 30


# -- AC4 ---------------------------------------------------------------------


@acceptance("AC4", "hermitization: gap is -1/4 [A,[A,B]]")
def test_ac4_random_pairs():
    rng = np.random.default_rng(44)
    for _ in range(100):
        dim = int(rng.integers(2, 9))
        a, b = random_hermitian(dim, rng), random_hermitian(dim, rng)
        gap, _ = hermitization_gap(a, b)
        am, bm = a.matrix, b.matrix
        inner = am @ bm - bm @ am
        ref = -0.25 * (am @ inner - inner @ am)
        assert maxabs(gap - ref) <= 1e-12 * max(1.0, maxabs(ref))


@acceptance("AC4", "hermitization: gap is -1/4 [A,[A,B]]")
@pytest.mark.parametrize("hbar", [1.0, 0.5, 3.0])
def test_ac4_pauli_instance(hbar):
    gap, _ = hermitization_gap(*pauli_pair(hbar))
    assert maxabs(gap + hbar**3 / 8 * np.diag([1.0, -1.0])) <= 1e-12 * hbar**3


@acceptance("AC4", "hermitization: gap is -1/4 [A,[A,B]]")
def test_ac4_scalar_commutator_gives_no_gap():
    # finite-dimensional [A, B] = cI forces c = 0 (trace), so the pair commutes
    rng = np.random.default_rng(4)
    a, b = commuting_pair(5, rng)
    gap, _ = hermitization_gap(a, b)
    assert maxabs(gap) <= 1e-12 * max(1.0, maxabs(a.matrix) ** 2 * maxabs(b.matrix))
    # [x, p] = i hbar: symbolically zero, and zero in expectation on the grid
    x, p = parse_polynomial("x"), parse_polynomial("px")
    sym = (x * (x * p + p * x) + (x * p + p * x) * x) / 4 - (x * x * p + p * x * x) / 2
    assert normal_order(sym, CommutationContext.canonical()).is_zero()
    grid = grid_representation(512, 20.0)
    gap, _ = hermitization_gap(grid.x, grid.p)
    for v in DEFAULT_FAMILY.states(grid):
        assert abs(np.vdot(v.amplitudes, gap @ v.amplitudes)) <= 1e-8


# -- AC5 ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def grid512():
    return grid_representation(512, 20.0, 0.8)


@acceptance("AC5", "canonical structure on the n=512 grid")
def test_ac5_commutators_against_dft_oracle(grid512):
    g = grid512
    n = g.n
    j = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(j, j) / n)
    k = 2 * np.pi * np.fft.fftfreq(n, d=g.dx)
    p = g.hbar * (w.conj().T * k) @ w / n
    assert maxabs(g.p.matrix - p) <= 1e-10 * maxabs(p)
    x = np.diag(g.positions)
    cxp = x @ p - p @ x
    cxd = x @ (p / g.hbar) - (p / g.hbar) @ x
    for v in DEFAULT_FAMILY.states(g):
        a = v.amplitudes
        assert abs(np.vdot(a, cxp @ a) - 1j * g.hbar) <= 1e-6
        assert abs(np.vdot(a, cxd @ a) - 1j) <= 1e-6
    assert check_canonical_commutator(g).passed


@acceptance("AC5", "canonical structure on the n=512 grid")
def test_ac5_displacement_and_translation(grid512):
    g = grid512
    assert np.array_equal(g.D.matrix * g.hbar, g.p.matrix)
    assert maxabs(g.p.matrix @ g.D.matrix - g.D.matrix @ g.p.matrix) <= 1e-12 * g.hbar
    results = {r.name: r for r in check_displacement_relations(g)}
    for name in ("grid.x-D-commutator", "grid.p-D-commutator", "grid.D-equals-p-over-hbar", "grid.translation-center"):
        assert results[name].passed, results[name]
    assert results["grid.x-D-commutator"].tolerance == 1e-6
    assert results["grid.translation-center"].tolerance == 1e-6 * g.length


@acceptance("AC5", "canonical structure on the n=512 grid")
@pytest.mark.parametrize("c", [1.0, 0.35, -2.0])
def test_ac5_ehrenfest_drift(grid512, c):
    r = check_ehrenfest_free(grid512, c)
    assert r.passed and r.tolerance == 1e-8


@acceptance("AC5", "canonical structure on the n=512 grid")
def test_ac5_minimal_coupling(grid512):
    commutator_check, inverse_check = check_minimal_coupling(grid512, charge=-1.2)
    assert commutator_check.passed and commutator_check.tolerance == 1e-6 * grid512.hbar
    assert inverse_check.passed


# -- AC6 ---------------------------------------------------------------------


@acceptance("AC6", "angular momentum identities for every j <= 10")
@pytest.mark.parametrize("hbar", [1.0, 0.6])
def test_ac6_angular_identities(hbar):
    results = check_angular_suite(10, hbar)
    assert results
    for r in results:
        assert r.passed, r
        assert r.tolerance <= 1e-9 * max(1.0, hbar**2)
    # independent spot check of every representation
    for j in spins_up_to(10):
        rep = spin_operators(j, hbar)
        lx, ly, lz = rep.Lx.matrix, rep.Ly.matrix, rep.Lz.matrix
        assert maxabs(lx @ ly - ly @ lx - 1j * hbar * lz) <= 1e-9 * hbar**2
        jj = float(j * (j + 1))
        assert maxabs(lx @ lx + ly @ ly + lz @ lz - hbar**2 * jj * np.eye(rep.dim)) <= 1e-9 * hbar**2 * jj


@acceptance("AC6", "angular momentum identities for every j <= 10")
def test_ac6_bloch_rotation_every_spin():
    for j in spins_up_to(10):
        r = check_bloch_rotation(j)
        assert r.passed and r.tolerance <= 1e-9, r


@acceptance("AC6", "angular momentum identities for every j <= 10")
def test_ac6_so3_cubic_order():
    r = check_rotation_group_identity()
    assert r.passed
    assert abs(r.measured) <= 0.2
    # independent fit from Rodrigues rotations
    def rot(axis, t):
        k = np.zeros((3, 3))
        i, j = {"x": (1, 2), "y": (2, 0), "z": (0, 1)}[axis]
        k[i, j], k[j, i] = -1.0, 1.0
        return np.eye(3) + np.sin(t) * k + (1 - np.cos(t)) * k @ k

    eps = np.array([1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    res = [maxabs(rot("x", e) @ rot("y", e) - rot("y", e) @ rot("x", e) - (rot("z", e**2) - np.eye(3))) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(res), 1)[0]
    assert abs(slope - 3.0) <= 0.2


# -- AC7 ---------------------------------------------------------------------


@acceptance("AC7", "Poisson-bracket rule and the counterexample")
def test_ac7_shipped_triples():
    results = check_pb_suite()
    assert len(results) == len(PB_GRID_TRIPLES) + len(PB_MATRIX_TRIPLES)
    for r in results:
        assert r.passed, r
        assert r.tolerance <= (1e-6 if r.name.startswith("pb.grid") else 1e-9)


@acceptance("AC7", "Poisson-bracket rule and the counterexample")
def test_ac7_counterexample_gap_is_pure_scalar():
    _, quoted, hermitized = pb_counterexample_polynomials()
    diff = normal_order(quoted - hermitized, CommutationContext.canonical())
    assert diff.is_scalar()
    assert sympy.simplify(diff.scalar_part() - 3 * I * param("gamma") * HBAR**3) == 0
    rep = demo_pb_counterexample()
    assert rep.data["pure_scalar"]
    assert rep.data["published_scalar"] == PUBLISHED_PB_GAP
    assert rep.data["discrepancy"] is True
    assert any("3*i*gamma*hbar^3" in f and PUBLISHED_PB_GAP in f for f in rep.flags)


# -- AC8 ---------------------------------------------------------------------


def mean_squared_verdict(a):
    q = arrange({"a1": a, "a2": a}, parse_polynomial("a1*a2"), [("a1",), ("a2",)])
    return representing_operator(arrangement_functional(q), a.dim, hbar=a.hbar)


@acceptance("AC8", "(mean A)^2 has a representing operator only for A = cI")
def test_ac8_random_operators_are_rejected():
    rng = np.random.default_rng(88)
    for _ in range(50):
        a = random_hermitian(int(rng.integers(2, 7)), rng)
        w = np.linalg.eigvalsh(a.matrix)
        assert w[-1] - w[0] > 1e-9
        assert isinstance(mean_squared_verdict(a), NotRepresentable)


@acceptance("AC8", "(mean A)^2 has a representing operator only for A = cI")
def test_ac8_multiples_of_identity_are_accepted():
    rng = np.random.default_rng(89)
    for _ in range(50):
        dim, c = int(rng.integers(2, 7)), float(rng.normal(scale=2.0))
        verdict = mean_squared_verdict(identity(dim) * c)
        assert isinstance(verdict, Representable)
        assert maxabs(verdict.operator.matrix - c * c * np.eye(dim)) <= 1e-10 * max(1.0, c * c)


# -- AC9 ---------------------------------------------------------------------


@acceptance("AC9", "simulate is byte-identical for a fixed seed")
@pytest.mark.parametrize("fmt", ["text", "json"])
@pytest.mark.parametrize("scenario", shipped_scenarios())
def test_ac9_simulate_is_reproducible(capsys, scenario, fmt):
    argv = ["simulate", scenario, "--seed", "20240", "--workers", "1", "--format", fmt]
    outputs = []
    for _ in range(2):
        status = main(argv)
        outputs.append(capsys.readouterr().out)
        assert status == 0
    assert outputs[0] == outputs[1]
    assert outputs[0]
