"""Measurement arrangements and their quantum counterparts.

A classical arrangement measures some input observables at time ``t1``,
feeds the values to a polynomial ``f`` and compares the result with an
output observable at ``t2``.  Its quantum counterpart distributes the
input measurements over copies of the system: measurements whose
operators commute share a copy, measurements whose operators do not
commute go to different copies.  Copies are the connected components of
the commutation graph over the inputs, so any component that contains a
non-commuting pair has no consistent assignment.

Expected outputs are computed exactly by enumerating the collapse chain on
each copy and multiplying across independent copies.  Monte Carlo runs
sample the same chain.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import CommutationContext, NCPolynomial, ObservableSymbol, is_simple, operators_commute, resolve_coefficient
from .errors import (
    BindingMismatch,
    CopyAssignmentConflict,
    DimensionMismatch,
    InconsistentCommutation,
    NotSimple,
    ScaleMismatch,
)
from .operators import (
    ZERO_PROJECTION,
    Operator,
    Spectrum,
    StateVector,
    eigendecompose,
    evolve,
    expectation,
    hermitian,
    random_state,
    sample_outcome,
)

COMMUTE_RTOL = 1e-9
CHUNK_SIZE = 8192
SHARED, SEPARATE = "shared", "separate"


@dataclass(frozen=True)
class ClassicalArrangement:
    """Inputs measured at a common time, combined by ``combine``.

    ``combine`` is a polynomial over the input symbol names.  The same
    observable may appear under several input names (for instance ``a1``
    and ``a2`` both bound to ``A``), which is how repeated measurements are
    expressed.
    """

    inputs: tuple
    output_symbol: ObservableSymbol | None
    output_time: float
    combine: NCPolynomial

    def __post_init__(self):
        inputs = tuple(
            (s if isinstance(s, ObservableSymbol) else ObservableSymbol(s), float(t)) for s, t in self.inputs
        )
        if not inputs:
            raise ValueError("an arrangement needs at least one input")
        names = [s.name for s, _ in inputs]
        if len(set(names)) != len(names):
            raise ValueError("input names must be distinct")
        times = {t for _, t in inputs}
        if len(times) != 1:
            raise ValueError("all inputs must be measured at the same time")
        if self.output_time < inputs[0][1]:
            raise ValueError("output time precedes input time")
        stray = self.combine.symbols() - set(names)
        if stray:
            raise ValueError("combine uses symbols that are not inputs: %s" % ", ".join(sorted(stray)))
        object.__setattr__(self, "inputs", inputs)

    @property
    def input_names(self) -> list[str]:
        return [s.name for s, _ in self.inputs]

    @property
    def input_time(self) -> float:
        return self.inputs[0][1]


@dataclass(frozen=True, eq=False)
class QuantumArrangement:
    """Copies of the system, each with an ordered list of input measurements.

    ``copies`` holds tuples of input names; within a copy the measurements
    are performed in the listed order.  ``hamiltonian`` (optional) evolves
    the prepared state from ``t0`` to ``t1`` (inputs) and ``t2`` (output).
    ``conforms`` records whether ``copies`` is the assignment prescribed by
    the commutation rule; non-conforming arrangements can be built with
    :func:`arrange` for comparison.
    """

    names: tuple
    binding: Mapping[str, Operator]
    copies: tuple
    combine: NCPolynomial
    terms: tuple
    hamiltonian: Operator | None = None
    t0: float = 0.0
    t1: float = 0.0
    t2: float = 0.0
    output: Operator | None = None
    conforms: bool = True
    _spectra: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.binding[self.names[0]].dim

    @property
    def hbar(self) -> float:
        return self.binding[self.names[0]].hbar

    def spectrum(self, name: str) -> Spectrum:
        if name not in self._spectra:
            self._spectra[name] = eigendecompose(self.binding[name])
        return self._spectra[name]

    def state_at_inputs(self, v0: StateVector) -> StateVector:
        if self.hamiltonian is None:
            return v0
        return evolve(v0, self.hamiltonian, self.t1 - self.t0)

    def state_at_output(self, v0: StateVector) -> StateVector:
        if self.hamiltonian is None:
            return v0
        return evolve(v0, self.hamiltonian, self.t2 - self.t0)


def _check_operators(names, binding) -> list[Operator]:
    missing = [n for n in names if n not in binding]
    if missing:
        raise BindingMismatch("no operator bound to %s" % ", ".join(missing))
    ops = [binding[n] for n in names]
    for op in ops[1:]:
        if op.dim != ops[0].dim:
            raise DimensionMismatch("bound operators have different dimensions")
        if op.hbar != ops[0].hbar:
            raise ScaleMismatch("bound operators carry different hbar scales")
    for n, op in zip(names, ops):
        if not op.is_hermitian:
            raise BindingMismatch("operator bound to %s is not Hermitian" % n)
    return ops


def _resolved_terms(f: NCPolynomial, names, hbar, params) -> tuple:
    """``(coefficient, input indices)`` with real coefficients."""
    index = {n: i for i, n in enumerate(names)}
    out = []
    for word, c in f.sorted_terms():
        value = resolve_coefficient(c, hbar, params)
        if abs(value.imag) > 1e-14 * max(1.0, abs(value)):
            raise ValueError("combine must have real coefficients, found %s" % c)
        out.append((value.real, tuple(index[s] for s in word)))
    return tuple(out)


def commutation_partition(
    names: Sequence[str],
    binding: Mapping[str, Operator],
    subsystems: Mapping[str, object] | None = None,
    placement: str = SHARED,
    rtol: float = COMMUTE_RTOL,
) -> tuple:
    """Finest copy partition in which commuting inputs share a copy.

    Inputs tagged with different ``subsystems`` labels are measurements on
    different factors of a composite system; they are joined only when
    ``placement`` is ``"shared"``.  Raises CopyAssignmentConflict when a
    component of the graph contains a non-commuting pair.
    """
    if placement not in (SHARED, SEPARATE):
        raise ValueError("placement must be 'shared' or 'separate'")
    subsystems = subsystems or {}
    names = list(names)
    parent = list(range(len(names)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    commute = {}
    for i, a in enumerate(names):
        for j in range(i + 1, len(names)):
            b = names[j]
            ok = binding[a] is binding[b] or operators_commute(binding[a], binding[b], rtol)
            commute[i, j] = ok
            split = subsystems.get(a) != subsystems.get(b) and placement == SEPARATE
            if ok and not split:
                parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(len(names)):
        groups.setdefault(find(i), []).append(i)
    copies = []
    for members in groups.values():
        for x in members:
            for y in members:
                if x < y and not commute[x, y]:
                    raise CopyAssignmentConflict(
                        "%s and %s do not commute but are linked through commuting measurements"
                        % (names[x], names[y])
                    )
        copies.append(tuple(names[i] for i in members))
    return tuple(sorted(copies, key=lambda c: names.index(c[0])))


def _check_context(ctx: CommutationContext, names, binding, rtol=COMMUTE_RTOL):
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            declared = ctx.commute(a, b)
            actual = binding[a] is binding[b] or operators_commute(binding[a], binding[b], rtol)
            if declared != actual:
                raise InconsistentCommutation(
                    "context says %s and %s %s, their operators %s"
                    % (a, b, "commute" if declared else "do not commute", "do" if actual else "do not")
                )


def build_quantum_counterpart(
    arr: ClassicalArrangement,
    binding: Mapping[str, Operator],
    ctx: CommutationContext | None = None,
    *,
    output: Operator | None = None,
    hamiltonian: Operator | None = None,
    t0: float | None = None,
    params: Mapping[str, float] | None = None,
    subsystems: Mapping[str, object] | None = None,
    placement: str = SHARED,
) -> QuantumArrangement:
    """Quantum counterpart prescribed by the commutation rule.

    Without ``ctx`` the commutation facts are read off the bound operators.
    With ``ctx`` every input pair is cross-checked against the operators.
    ``combine`` must be simple in the context: no word may multiply values
    of measurements whose operators fail to commute.
    """
    names = arr.input_names
    ops = _check_operators(names, binding)
    if ctx is None:
        ctx = CommutationContext.from_operators({n: binding[n] for n in names}, COMMUTE_RTOL)
    else:
        _check_context(ctx, names, binding)
    verdict = is_simple(arr.combine, ctx)
    if not verdict:
        raise NotSimple(verdict.witness)
    copies = commutation_partition(names, binding, subsystems, placement)
    t1 = arr.input_time
    return QuantumArrangement(
        names=tuple(names),
        binding={n: binding[n] for n in names},
        copies=copies,
        combine=arr.combine,
        terms=_resolved_terms(arr.combine, names, ops[0].hbar, params),
        hamiltonian=hamiltonian,
        t0=t1 if t0 is None else float(t0),
        t1=t1,
        t2=arr.output_time,
        output=output,
        conforms=True,
    )


def arrange(
    binding: Mapping[str, Operator],
    combine: NCPolynomial,
    copies: Sequence[Sequence[str]],
    *,
    output: Operator | None = None,
    hamiltonian: Operator | None = None,
    times: tuple = (0.0, 0.0, 0.0),
    params: Mapping[str, float] | None = None,
) -> QuantumArrangement:
    """Arrangement with an explicit copy layout, conforming or not.

    Used to model set-ups that ignore the commutation rule, such as
    measuring ``A`` on two separate copies and multiplying the results.
    """
    copies = tuple(tuple(c) for c in copies)
    names = [n for c in copies for n in c]
    if len(set(names)) != len(names):
        raise ValueError("an input may appear in only one copy")
    stray = combine.symbols() - set(names)
    if stray:
        raise ValueError("combine uses symbols that are not inputs: %s" % ", ".join(sorted(stray)))
    ops = _check_operators(names, binding)
    try:
        prescribed = commutation_partition(names, binding)
        conforms = {frozenset(c) for c in prescribed} == {frozenset(c) for c in copies}
    except CopyAssignmentConflict:
        conforms = False
    t0, t1, t2 = (float(t) for t in times)
    return QuantumArrangement(
        names=tuple(names),
        binding={n: binding[n] for n in names},
        copies=copies,
        combine=combine,
        terms=_resolved_terms(combine, names, ops[0].hbar, params),
        hamiltonian=hamiltonian,
        t0=t0,
        t1=t1,
        t2=t2,
        output=output,
        conforms=conforms,
    )


# ---------------------------------------------------------------------------
# outcome distributions


@dataclass(frozen=True)
class CopyDistribution:
    """Leaves of the collapse chain on one copy.

    ``values[l, m]`` is the value recorded by the ``m``-th measurement of
    the copy on leaf ``l``; ``probabilities[l]`` is the leaf probability.
    """

    names: tuple
    values: np.ndarray
    probabilities: np.ndarray


def copy_distribution(qarr: QuantumArrangement, copy: Sequence[str], v: StateVector) -> CopyDistribution:
    spectra = [qarr.spectrum(n) for n in copy]
    values, probs = [], []

    def walk(depth, amp, p, path):
        if depth == len(spectra):
            values.append(path)
            probs.append(p)
            return
        spec = spectra[depth]
        for k in range(len(spec.eigenspaces)):
            vk = spec.eigenvectors[:, list(spec.eigenspaces[k])]
            proj = vk @ (vk.conj().T @ amp)
            norm = np.linalg.norm(proj)
            if norm < ZERO_PROJECTION:
                continue
            walk(depth + 1, proj / norm, p * norm**2, path + (float(spec.levels[k]),))

    walk(0, v.amplitudes, 1.0, ())
    return CopyDistribution(tuple(copy), np.array(values, dtype=float).reshape(len(probs), len(copy)), np.array(probs))


def _word_moment(dist: CopyDistribution, positions: Sequence[int]) -> float:
    prod = np.ones(len(dist.probabilities))
    for m in positions:
        prod = prod * dist.values[:, m]
    return math.fsum(dist.probabilities * prod)


def analytic_expected_output(qarr: QuantumArrangement, v0: StateVector) -> float:
    """Exact mean of ``f`` over the outcome distribution of every copy."""
    v = qarr.state_at_inputs(v0)
    dists = [copy_distribution(qarr, c, v) for c in qarr.copies]
    where = {}
    for ci, c in enumerate(qarr.copies):
        for m, n in enumerate(c):
            where[qarr.names.index(n)] = (ci, m)
    total = []
    for c, word in qarr.terms:
        per_copy: dict[int, list[int]] = {}
        for idx in word:
            ci, m = where[idx]
            per_copy.setdefault(ci, []).append(m)
        value = c
        for ci, positions in per_copy.items():
            value *= _word_moment(dists[ci], positions)
        total.append(value)
    return math.fsum(total)


def output_expectation(qarr: QuantumArrangement, v0: StateVector) -> float:
    """``<C>`` at ``t2`` for the output measurement."""
    if qarr.output is None:
        raise ValueError("arrangement has no output measurement")
    return expectation(qarr.output, qarr.state_at_output(v0))


def _combine_values(qarr: QuantumArrangement, values: np.ndarray) -> np.ndarray:
    """``f`` evaluated row-wise on input values ``values[run, input]``."""
    out = np.zeros(values.shape[0])
    for c, word in qarr.terms:
        term = np.full(values.shape[0], c)
        for idx in word:
            term = term * values[:, idx]
        out = out + term
    return out


def simulate_run(qarr: QuantumArrangement, v0: StateVector, rng: np.random.Generator) -> float:
    """One run with explicit sequential collapse on every copy."""
    v = qarr.state_at_inputs(v0)
    values = np.zeros((1, len(qarr.names)))
    for copy in qarr.copies:
        state = v
        for n in copy:
            rec = sample_outcome(qarr.spectrum(n), state, rng)
            values[0, qarr.names.index(n)] = rec.value
            state = rec.post_state
    return float(_combine_values(qarr, values)[0])


def _sample_chunk(qarr, dists, seed, size) -> np.ndarray:
    rng = np.random.default_rng(seed)
    values = np.zeros((size, len(qarr.names)))
    for dist in dists:
        cdf = np.cumsum(dist.probabilities)
        leaves = np.searchsorted(cdf, rng.random(size) * cdf[-1], side="right")
        leaves = np.minimum(leaves, len(cdf) - 1)
        for m, n in enumerate(dist.names):
            values[:, qarr.names.index(n)] = dist.values[leaves, m]
    return _combine_values(qarr, values)


def monte_carlo_samples(
    qarr: QuantumArrangement, v0: StateVector, n_runs: int, master_seed: int, workers: int = 1
) -> np.ndarray:
    """Outputs of ``n_runs`` independent simulated runs.

    Runs are drawn in fixed-size chunks, chunk ``c`` from the ``c``-th child
    of ``SeedSequence(master_seed)``.  Because the chunking does not depend
    on ``workers``, the result is identical for any worker count.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    v = qarr.state_at_inputs(v0)
    dists = [copy_distribution(qarr, c, v) for c in qarr.copies]
    n_chunks = -(-n_runs // CHUNK_SIZE)
    seeds = np.random.SeedSequence(master_seed).spawn(n_chunks)
    sizes = [min(CHUNK_SIZE, n_runs - i * CHUNK_SIZE) for i in range(n_chunks)]
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _sample_chunk(qarr, dists, *a), zip(seeds, sizes)))
    else:
        parts = [_sample_chunk(qarr, dists, s, k) for s, k in zip(seeds, sizes)]
    return np.concatenate(parts)


def summarize(samples: np.ndarray) -> tuple[float, float]:
    """Mean and standard error ``std / sqrt(n)`` with ordered summation."""
    n = len(samples)
    mean = math.fsum(samples) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((samples - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def monte_carlo_output(
    qarr: QuantumArrangement, v0: StateVector, n_runs: int, master_seed: int, workers: int = 1
) -> tuple[float, float]:
    """``(mean, stderr)`` of the simulated output."""
    return summarize(monte_carlo_samples(qarr, v0, n_runs, master_seed, workers))


# ---------------------------------------------------------------------------
# representability


@dataclass(frozen=True, eq=False)
class Representable:
    operator: Operator

    def __bool__(self):
        return True


@dataclass(frozen=True, eq=False)
class NotRepresentable:
    reason: str
    worst_state: StateVector | None = None
    violation: float = float("nan")

    def __bool__(self):
        return False


def arrangement_functional(qarr: QuantumArrangement) -> Callable[[StateVector], float]:
    return lambda v: analytic_expected_output(qarr, v)


def representing_operator(
    functional: Callable[[StateVector], float],
    dim: int,
    *,
    hbar: float = 1.0,
    n_validate: int = 200,
    tol: float = 1e-8,
    seed: int = 0,
) -> Representable | NotRepresentable:
    """Find Hermitian ``M`` with ``<M>_v = E(v)`` for all states, if any.

    ``M`` is reconstructed from ``dim**2`` probe states: basis vectors give
    the diagonal, ``(e_j + e_k)/sqrt2`` the real parts and
    ``(e_j + i e_k)/sqrt2`` the imaginary parts of the off-diagonal
    entries.  The candidate is then validated on ``n_validate`` random
    states; the largest violation must not exceed ``tol``.

    The test is absolute.  For ``E(v) = <A>_v^2`` the violation scales like
    the square of the spectral spread of ``A``, so spreads much below
    ``sqrt(tol)`` are not detected.
    """
    if dim > 64:
        raise ValueError("representability probing is limited to dim <= 64")
    diag = np.array([functional(StateVector.basis(dim, j)) for j in range(dim)], dtype=float)
    m = np.diag(diag).astype(complex)
    s = 1 / np.sqrt(2)
    for j in range(dim):
        for k in range(j + 1, dim):
            base = (diag[j] + diag[k]) / 2
            v = np.zeros(dim, dtype=complex)
            v[j], v[k] = s, s
            re = functional(StateVector.normalized(v)) - base
            v[k] = 1j * s
            im = base - functional(StateVector.normalized(v))
            m[j, k] = re + 1j * im
            m[k, j] = re - 1j * im
    candidate = hermitian(m, hbar)
    rng = np.random.default_rng(seed)
    worst, worst_state = 0.0, None
    for _ in range(n_validate):
        v = random_state(dim, rng)
        gap = abs(expectation(candidate, v) - functional(v))
        if gap > worst:
            worst, worst_state = gap, v
    if worst > tol:
        return NotRepresentable(
            "expected output differs from <M> by %.3e on a random state" % worst, worst_state, worst
        )
    return Representable(candidate)


@dataclass(frozen=True, eq=False)
class ArrangementReport:
    analytic_mean: float
    sampled_mean: float
    sampled_stderr: float
    n_runs: int
    representable: Representable | NotRepresentable
    support: tuple = ()

    @property
    def consistent(self) -> bool:
        return abs(self.sampled_mean - self.analytic_mean) <= 4 * self.sampled_stderr + 1e-12 * max(
            1.0, abs(self.analytic_mean)
        )


def run_arrangement(
    qarr: QuantumArrangement, v0: StateVector, n_runs: int, master_seed: int, workers: int = 1
) -> ArrangementReport:
    samples = monte_carlo_samples(qarr, v0, n_runs, master_seed, workers)
    mean, stderr = summarize(samples)
    support = tuple(sorted({round(float(x), 12) for x in samples}))
    return ArrangementReport(
        analytic_expected_output(qarr, v0),
        mean,
        stderr,
        n_runs,
        representing_operator(arrangement_functional(qarr), qarr.dim, hbar=qarr.hbar),
        support,
    )
