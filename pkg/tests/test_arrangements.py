import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avcp.algebra import CommutationContext, parse_polynomial, transcribe
from avcp.arrangements import (
    CHUNK_SIZE,
    ClassicalArrangement,
    NotRepresentable,
    Representable,
    analytic_expected_output,
    arrange,
    arrangement_functional,
    build_quantum_counterpart,
    commutation_partition,
    copy_distribution,
    monte_carlo_output,
    monte_carlo_samples,
    output_expectation,
    representing_operator,
    run_arrangement,
    simulate_run,
    summarize,
)
from avcp.checks import commuting_pair
from avcp.errors import CopyAssignmentConflict, InconsistentCommutation, NotSimple
from avcp.operators import (
    StateVector,
    eigendecompose,
    expectation,
    hermitian,
    identity,
    random_hermitian,
    random_state,
)
from avcp.representations import gaussian_wavepacket, grid_representation, spin_operators, tensor_lift

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def classical(names, text, t=0.0):
    return ClassicalArrangement([(n, t) for n in names], None, t, parse_polynomial(text))


def noncommuting(dim=3, seed=0):
    rng = np.random.default_rng(seed)
    return random_hermitian(dim, rng), random_hermitian(dim, rng)


# -- classical arrangements --------------------------------------------------


def test_input_times_must_agree():
    with pytest.raises(ValueError):
        ClassicalArrangement([("a", 0.0), ("b", 1.0)], None, 2.0, parse_polynomial("a + b"))


def test_output_not_before_inputs():
    with pytest.raises(ValueError):
        ClassicalArrangement([("a", 1.0)], None, 0.5, parse_polynomial("a"))


def test_combine_over_inputs_only():
    with pytest.raises(ValueError):
        ClassicalArrangement([("a", 0.0)], None, 0.0, parse_polynomial("a + b"))


# -- copy assignment ---------------------------------------------------------


def test_sum_of_noncommuting_uses_two_copies():
    a, b = noncommuting()
    q = build_quantum_counterpart(classical("ab", "a + b"), {"a": a, "b": b})
    assert q.copies == (("a",), ("b",))
    assert q.conforms


def test_product_of_commuting_shares_a_copy():
    a, b = commuting_pair(4, np.random.default_rng(1))
    q = build_quantum_counterpart(classical("ab", "a*b"), {"a": a, "b": b})
    assert q.copies == (("a", "b"),)


def test_product_of_noncommuting_is_refused():
    a, b = noncommuting()
    with pytest.raises(NotSimple) as info:
        build_quantum_counterpart(classical("ab", "a*b"), {"a": a, "b": b})
    assert info.value.witness == ("a", "b")


def test_context_must_agree_with_operators():
    a, b = noncommuting()
    with pytest.raises(InconsistentCommutation):
        build_quantum_counterpart(classical("ab", "a + b"), {"a": a, "b": b}, CommutationContext(["a", "b"], [("a", "b")]))
    c, d = commuting_pair(3, np.random.default_rng(2))
    with pytest.raises(InconsistentCommutation):
        build_quantum_counterpart(classical("ab", "a + b"), {"a": c, "b": d}, CommutationContext(["a", "b"]))


def test_linked_noncommuting_pair_is_a_conflict():
    a, c = noncommuting()
    b = 2.0 * identity(3)
    with pytest.raises(CopyAssignmentConflict):
        commutation_partition(["a", "b", "c"], {"a": a, "b": b, "c": c})


def test_subsystem_placement():
    rng = np.random.default_rng(3)
    a = tensor_lift(random_hermitian(2, rng), 0, [2, 2])
    b = tensor_lift(random_hermitian(2, rng), 1, [2, 2])
    binding = {"a": a, "b": b}
    labels = {"a": "left", "b": "right"}
    assert commutation_partition(["a", "b"], binding, labels, "shared") == (("a", "b"),)
    assert commutation_partition(["a", "b"], binding, labels, "separate") == (("a",), ("b",))


# -- A^2 by three arrangements -----------------------------------------------


@pytest.fixture(scope="module")
def spin_one():
    rep = spin_operators(1)
    return rep.Lx, random_state(3, np.random.default_rng(11))


def test_measure_once_and_square(spin_one):
    a, v = spin_one
    q = build_quantum_counterpart(classical("a", "a^2"), {"a": a})
    assert analytic_expected_output(q, v) == pytest.approx(expectation(hermitian(a.matrix @ a.matrix), v), abs=1e-12)


def test_measure_twice_on_one_copy(spin_one):
    a, v = spin_one
    q = build_quantum_counterpart(classical(["a1", "a2"], "a1*a2"), {"a1": a, "a2": a})
    assert q.copies == (("a1", "a2"),)
    assert analytic_expected_output(q, v) == pytest.approx(expectation(hermitian(a.matrix @ a.matrix), v), abs=1e-12)


def test_measure_on_two_copies(spin_one):
    a, v = spin_one
    q = arrange({"a1": a, "a2": a}, parse_polynomial("a1*a2"), [("a1",), ("a2",)])
    assert not q.conforms
    assert analytic_expected_output(q, v) == pytest.approx(expectation(a, v) ** 2, abs=1e-12)


def test_monte_carlo_for_squared_value(spin_one):
    a, v = spin_one
    q = build_quantum_counterpart(classical("a", "a^2"), {"a": a})
    mean, err = monte_carlo_output(q, v, 100_000, master_seed=5)
    assert abs(mean - expectation(hermitian(a.matrix @ a.matrix), v)) <= 4 * err


# -- the spin-1/2 sum --------------------------------------------------------


def test_spin_half_sum_layout_and_support():
    rep = spin_operators("1/2")
    binding = {"sx": rep.Lx, "sz": rep.Lz}
    v = random_state(2, np.random.default_rng(8))
    q = build_quantum_counterpart(classical(["sx", "sz"], "sx + sz"), binding)
    assert q.copies == (("sx",), ("sz",))
    samples = monte_carlo_samples(q, v, 20_000, 1)
    assert set(np.round(samples, 12)) == {-1.0, 0.0, 1.0}
    exact = expectation(rep.Lx, v) + expectation(rep.Lz, v)
    assert analytic_expected_output(q, v) == pytest.approx(exact, abs=1e-12)
    assert np.allclose(eigendecompose(rep.Lx + rep.Lz).levels, [-1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)


def test_spin_half_sequential_contrast():
    # measuring sz after sx on the same copy sees a randomized spin
    rep = spin_operators("1/2")
    v = StateVector.basis(2, 0)
    q = arrange({"sx": rep.Lx, "sz": rep.Lz}, parse_polynomial("sx + sz"), [("sx", "sz")])
    assert not q.conforms
    assert analytic_expected_output(q, v) == pytest.approx(0.0, abs=1e-15)
    assert expectation(rep.Lx + rep.Lz, v) == pytest.approx(0.5)


def test_collapse_chain_matches_explicit_runs():
    rep = spin_operators(1)
    v = random_state(3, np.random.default_rng(4))
    q = arrange({"a": rep.Lx, "b": rep.Lz, "c": rep.Ly}, parse_polynomial("a*b + c - b^2"), [("a", "b"), ("c",)])
    rng = np.random.default_rng(9)
    runs = np.array([simulate_run(q, v, rng) for _ in range(20_000)])
    mean, err = summarize(runs)
    assert abs(mean - analytic_expected_output(q, v)) <= 4 * err


def test_collapse_chain_probabilities_sum_to_one():
    rep = spin_operators("3/2")
    v = random_state(4, np.random.default_rng(0))
    q = arrange({"a": rep.Lx, "b": rep.Lz}, parse_polynomial("a + b"), [("a", "b")])
    dist = copy_distribution(q, ("a", "b"), v)
    assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    assert dist.values.shape == (len(dist.probabilities), 2)


# -- Monte Carlo contract ----------------------------------------------------


def test_same_seed_same_samples_different_seed_differs():
    a, b = noncommuting(3, 6)
    q = build_quantum_counterpart(classical("ab", "a + 2*b"), {"a": a, "b": b})
    v = random_state(3, np.random.default_rng(1))
    s1 = monte_carlo_samples(q, v, 3 * CHUNK_SIZE + 17, 42)
    s2 = monte_carlo_samples(q, v, 3 * CHUNK_SIZE + 17, 42)
    s3 = monte_carlo_samples(q, v, 3 * CHUNK_SIZE + 17, 43)
    assert np.array_equal(s1, s2)
    assert not np.array_equal(s1, s3)


def test_worker_count_does_not_change_samples():
    a, b = noncommuting(3, 6)
    q = build_quantum_counterpart(classical("ab", "a - b"), {"a": a, "b": b})
    v = random_state(3, np.random.default_rng(2))
    one = monte_carlo_samples(q, v, 50_000, 7, workers=1)
    four = monte_carlo_samples(q, v, 50_000, 7, workers=4)
    assert np.array_equal(one, four)


def test_eigenstate_input_has_zero_variance():
    rep = spin_operators(2)
    v = StateVector(eigendecompose(rep.Lz).eigenvectors[:, 1])
    q = build_quantum_counterpart(classical("a", "a^3 - a"), {"a": rep.Lz})
    mean, err = monte_carlo_output(q, v, 10_000, 3)
    lam = -1.0  # second-lowest level of Lz at j=2
    value = lam**3 - lam
    assert err == 0.0
    assert mean == value == analytic_expected_output(q, v)


def test_stderr_definition():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    mean, err = summarize(x)
    assert mean == 3.5
    assert err == pytest.approx(np.std(x, ddof=1) / 2)


def test_runs_must_be_positive():
    a, _ = noncommuting()
    q = build_quantum_counterpart(classical("a", "a"), {"a": a})
    with pytest.raises(ValueError):
        monte_carlo_samples(q, random_state(3, np.random.default_rng(0)), 0, 1)


# -- properties --------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=6))
def test_shared_copy_order_is_irrelevant(seed, dim):
    rng = np.random.default_rng(seed)
    a, b = commuting_pair(dim, rng)
    v = random_state(dim, rng)
    f = parse_polynomial("a*b^2 - 3*a + b")
    e1 = analytic_expected_output(arrange({"a": a, "b": b}, f, [("a", "b")]), v)
    e2 = analytic_expected_output(arrange({"a": a, "b": b}, f, [("b", "a")]), v)
    assert abs(e1 - e2) <= 1e-12 * max(1.0, abs(e1))


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=6))
def test_soundness_against_transcription(seed, dim):
    rng = np.random.default_rng(seed)
    a, b = commuting_pair(dim, rng)
    binding = {"a": a, "b": b, "c": random_hermitian(dim, rng)}
    f = parse_polynomial("a*b - a^2 + 2*c^2 + c")
    q = build_quantum_counterpart(classical("abc", "a*b - a^2 + 2*c^2 + c"), binding)
    v = random_state(dim, rng)
    ref = expectation(transcribe(f, CommutationContext.from_operators(binding), binding), v)
    assert abs(analytic_expected_output(q, v) - ref) <= 1e-9 * max(1.0, abs(ref))


def test_evolution_between_inputs_and_output():
    grid = grid_representation(128, 20.0)
    c, dt = 0.8, 0.5
    h = hermitian(c * grid.p.matrix)
    arr = ClassicalArrangement([("x", 0.0)], "x", dt, parse_polynomial("x + c*dt", params={"c", "dt"}))
    q = build_quantum_counterpart(arr, {"x": grid.x}, output=grid.x, hamiltonian=h, params={"c": c, "dt": dt})
    v = gaussian_wavepacket(grid, center=-1.0, width=1.25, k0=0.4)
    assert analytic_expected_output(q, v) == pytest.approx(output_expectation(q, v), abs=1e-8 * c * dt)


# -- representability --------------------------------------------------------


def test_square_arrangements_are_represented(spin_one):
    a, _ = spin_one
    for q in (
        build_quantum_counterpart(classical("a", "a^2"), {"a": a}),
        build_quantum_counterpart(classical(["a1", "a2"], "a1*a2"), {"a1": a, "a2": a}),
    ):
        verdict = representing_operator(arrangement_functional(q), 3)
        assert isinstance(verdict, Representable)
        assert np.max(np.abs(verdict.operator.matrix - a.matrix @ a.matrix)) < 1e-8


def test_mean_squared_is_not_represented(spin_one):
    a, _ = spin_one
    q = arrange({"a1": a, "a2": a}, parse_polynomial("a1*a2"), [("a1",), ("a2",)])
    verdict = representing_operator(arrangement_functional(q), 3)
    assert isinstance(verdict, NotRepresentable)
    assert verdict.violation > 1e-8
    assert verdict.worst_state is not None


def test_product_on_separate_copies_is_not_represented():
    a, b = noncommuting(3, 12)
    q = arrange({"a": a, "b": b}, parse_polynomial("a*b"), [("a",), ("b",)])
    assert not representing_operator(arrangement_functional(q), 3)


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=5))
def test_mean_squared_rejected_iff_spread(seed, dim):
    rng = np.random.default_rng(seed)
    a = random_hermitian(dim, rng)
    q = arrange({"a1": a, "a2": a}, parse_polynomial("a1*a2"), [("a1",), ("a2",)])
    assert not representing_operator(arrangement_functional(q), dim)
    c = float(rng.normal())
    flat = c * identity(dim)
    q = arrange({"a1": flat, "a2": flat}, parse_polynomial("a1*a2"), [("a1",), ("a2",)])
    verdict = representing_operator(arrangement_functional(q), dim)
    assert verdict
    assert np.allclose(verdict.operator.matrix, c * c * np.eye(dim), atol=1e-10)


def test_validation_detection_limit():
    # A = I + d*H gives a non-quadratic part of order d^2, invisible below the 1e-8 validation tolerance
    rng = np.random.default_rng(0)
    h = random_hermitian(3, rng).matrix
    h = h / np.max(np.abs(np.linalg.eigvalsh(h)))
    verdicts = {}
    for d in (1e-2, 1e-6):
        a = hermitian(np.eye(3) + d * h)
        q = arrange({"a1": a, "a2": a}, parse_polynomial("a1*a2"), [("a1",), ("a2",)])
        verdicts[d] = bool(representing_operator(arrangement_functional(q), 3))
    assert verdicts == {1e-2: False, 1e-6: True}


def test_probe_dimension_limit():
    with pytest.raises(ValueError):
        representing_operator(lambda v: 0.0, 65)


def test_run_arrangement_report(spin_one):
    a, v = spin_one
    q = build_quantum_counterpart(classical("a", "a^2"), {"a": a})
    rep = run_arrangement(q, v, 20_000, 1)
    assert rep.consistent
    assert rep.support == (0.0, 1.0)
    assert rep.representable
