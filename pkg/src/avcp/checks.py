"""Executable identity checks.

Every check returns :class:`CheckResult` records whose ``passed`` flag is
exactly ``measured <= tolerance``.  Grid identities involving the position
operator are stated on expectations over interior wavepackets: on a finite
grid ``[x, p] = i hbar`` cannot hold as a matrix identity (the trace of a
commutator vanishes), and the periodic boundary is where it breaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .algebra import (
    CommutationContext,
    PhaseSpacePolynomial,
    is_simple,
    param,
    parse_polynomial,
    poisson_bracket,
    transcribe,
)
from .arrangements import (
    ClassicalArrangement,
    analytic_expected_output,
    arrange,
    arrangement_functional,
    build_quantum_counterpart,
    representing_operator,
)
from .errors import NotSimple, UnknownCheckName
from .operators import (
    HERMITIAN,
    Operator,
    StateVector,
    apply_generator,
    commutator,
    eigendecompose,
    expectation,
    function_of,
    mean_value,
    random_hermitian,
    random_state,
)
from .representations import (
    DEFAULT_FAMILY,
    GridRepresentation,
    SpinRepresentation,
    WavepacketFamily,
    bloch_vector,
    gamma_constants,
    gaussian_wavepacket,
    grid_representation,
    minimal_coupling_momentum,
    require_interior,
    rotation_generator,
    so3_rotation,
    spin_operators,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    details: str = ""
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "measured", float(self.measured))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "passed", bool(self.measured <= self.tolerance))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "details": self.details,
        }


def _maxabs(m) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


def _interior_states(grid: GridRepresentation, family) -> list[StateVector]:
    states = family.states(grid) if isinstance(family, WavepacketFamily) else list(family)
    for v in states:
        require_interior(grid, v)
    return states


def log_log_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# ---------------------------------------------------------------------------
# grid


def check_canonical_commutator(grid: GridRepresentation, family=DEFAULT_FAMILY) -> CheckResult:
    """``<[x, p]> = i hbar`` on every interior wavepacket of ``family``."""
    states = _interior_states(grid, family)
    c = commutator(grid.x, grid.p)
    worst = max(abs(mean_value(c, v) - 1j * grid.hbar) for v in states)
    return CheckResult(
        "grid.canonical-commutator", worst, 1e-6 * grid.hbar, "max |<[x,p]> - i hbar| over %d states" % len(states)
    )


def check_massive_commutator(grid: GridRepresentation, family=DEFAULT_FAMILY) -> CheckResult:
    """``<p [x,p] + [x,p] p> = 2 i hbar <p>``, scaled by ``max(1, |<p>|/hbar)``."""
    states = _interior_states(grid, family)
    c = commutator(grid.x, grid.p).matrix
    lhs_op = grid.p.matrix @ c + c @ grid.p.matrix
    worst = 0.0
    for v in states:
        lhs = np.vdot(v.amplitudes, lhs_op @ v.amplitudes)
        p = mean_value(grid.p, v)
        worst = max(worst, abs(lhs - 2j * grid.hbar * p) / max(1.0, abs(p) / grid.hbar))
    return CheckResult(
        "grid.massive-commutator", worst, 1e-6 * grid.hbar**2, "<p[x,p]+[x,p]p> against 2 i hbar <p>"
    )


def check_displacement_relations(
    grid: GridRepresentation, family=DEFAULT_FAMILY, shift: float | None = None
) -> list[CheckResult]:
    """Displacement generator identities and the active/passive picture."""
    states = _interior_states(grid, family)
    out = []
    c = commutator(grid.x, grid.D)
    worst = max(abs(mean_value(c, v) - 1j) for v in states)
    out.append(CheckResult("grid.x-D-commutator", worst, 1e-6, "max |<[x,D]> - i| over %d states" % len(states)))
    out.append(
        CheckResult(
            "grid.p-D-commutator", _maxabs(commutator(grid.p, grid.D).matrix), 1e-12 * grid.hbar, "matrix identity"
        )
    )
    out.append(
        CheckResult("grid.D-equals-p-over-hbar", _maxabs(grid.D.matrix - grid.p.matrix / grid.hbar), 1e-14, "matrix identity")
    )
    out.extend(check_translation(grid, shift))
    return out


def check_translation(grid: GridRepresentation, shift: float | None = None) -> list[CheckResult]:
    """``exp(-i eps D)`` shifts a wavepacket by ``eps``.

    Two records: the shift of ``<x>`` (within ``1e-6 * length``) and the
    pointwise density of the shifted state against the density of the
    original packet evaluated at ``x - eps`` (relative to the peak).
    """
    eps = 0.0157 * grid.length if shift is None else shift
    center, width, k0 = -grid.length / 40, grid.length / 16, 2 * np.pi * 3 / grid.length
    v = gaussian_wavepacket(grid, center, width, k0)
    moved = apply_generator(grid.D, eps, v)
    require_interior(grid, moved)
    drift = expectation(grid.x, moved) - expectation(grid.x, v)
    passive = gaussian_wavepacket(grid, center + eps, width, k0)
    rho, rho_ref = np.abs(moved.amplitudes) ** 2, np.abs(passive.amplitudes) ** 2
    return [
        CheckResult(
            "grid.translation-center", abs(drift - eps), 1e-6 * grid.length, "shift %.4g, <x> moved by %.12g" % (eps, drift)
        ),
        CheckResult(
            "grid.active-passive-density",
            _maxabs(rho - rho_ref) / rho_ref.max(),
            1e-9,
            "|exp(-i eps D) psi|^2 against |psi(x - eps)|^2",
        ),
    ]


def check_ehrenfest_free(
    grid: GridRepresentation,
    c: float = 1.0,
    dt_list: Sequence[float] = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3),
    wavepacket: StateVector | None = None,
) -> CheckResult:
    """Drift of ``<x>`` under ``H = c p`` is exactly ``c dt``."""
    v = gaussian_wavepacket(grid, grid.length / 40) if wavepacket is None else wavepacket
    require_interior(grid, v)
    h = grid.p * c
    spec = eigendecompose(h)
    x0 = expectation(grid.x, v)
    worst = 0.0
    for dt in dt_list:
        w = apply_generator(h, dt / grid.hbar, v, spec)
        require_interior(grid, w)
        if dt:
            worst = max(worst, abs(expectation(grid.x, w) - x0 - c * dt) / abs(c * dt))
    return CheckResult(
        "grid.ehrenfest-drift", worst, 1e-8, "max |d<x> - c dt| / (c dt) over dt in %s" % list(dt_list)
    )


def truncated_drift_residuals(
    grid: GridRepresentation, c: float, dt_list: Sequence[float], wavepacket: StateVector
) -> list[float]:
    """``|<x>' - <x> - c dt|`` with ``psi' = (1 - i H dt / hbar) psi``, unnormalized.

    The residual is ``(c dt / hbar)^2 <p x p>``: second order in ``dt``.
    """
    h = grid.p.matrix * c
    x = grid.x.matrix
    a = wavepacket.amplitudes
    x0 = np.vdot(a, x @ a).real
    out = []
    for dt in dt_list:
        b = a - 1j * dt / grid.hbar * (h @ a)
        out.append(abs(np.vdot(b, x @ b).real - x0 - c * dt))
    return out


def check_ehrenfest_order(
    grid: GridRepresentation,
    c: float = 1.0,
    dt_list: Sequence[float] = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3),
    wavepacket: StateVector | None = None,
) -> CheckResult:
    """First-order propagator leaves an ``O(dt^2)`` residual; slope 2 +- 0.2."""
    v = gaussian_wavepacket(grid, grid.length / 40) if wavepacket is None else wavepacket
    require_interior(grid, v)
    res = truncated_drift_residuals(grid, c, dt_list, v)
    slope = log_log_slope(dt_list, res)
    return CheckResult("grid.ehrenfest-order", abs(slope - 2.0), 0.2, "fitted order %.4f" % slope)


def check_minimal_coupling(
    grid: GridRepresentation,
    vector_potential: PhaseSpacePolynomial | None = None,
    charge: float = 1.0,
    family=DEFAULT_FAMILY,
) -> list[CheckResult]:
    """``<[x, m xdot]> = i hbar`` and ``m xdot + e A = p``."""
    a = PhaseSpacePolynomial.parse("0.7*x") if vector_potential is None else vector_potential
    states = _interior_states(grid, family)
    mv = minimal_coupling_momentum(grid, a, charge)
    c = commutator(grid.x, mv)
    worst = max(abs(mean_value(c, v) - 1j * grid.hbar) for v in states)
    a_values = np.array([complex(a.expr.subs(param("x"), float(x))) for x in grid.positions])
    back = mv.matrix + charge * np.diag(a_values) - grid.p.matrix
    return [
        CheckResult("grid.minimal-coupling-commutator", worst, 1e-6 * grid.hbar, "A(x) = %s" % a.expr),
        CheckResult("grid.minimal-coupling-inverse", _maxabs(back), 1e-12 * max(1.0, grid.p.max_abs()), "m xdot + e A = p"),
    ]


# ---------------------------------------------------------------------------
# angular momentum


def angular_residuals(rep: SpinRepresentation) -> dict[str, float]:
    """Largest residual of each angular identity for one representation."""
    hb = rep.hbar
    lx, ly, lz = rep.Lx, rep.Ly, rep.Lz
    comm = max(
        _maxabs(commutator(a, b).matrix - 1j * hb * c.matrix) for a, b, c in ((lx, ly, lz), (ly, lz, lx), (lz, lx, ly))
    )
    k = lz.matrix + (1j / hb) * commutator(lx, ly).matrix
    deriv = max(_maxabs(a.matrix @ k - k @ a.matrix) for a in (lx, ly, lz))
    j = float(rep.j)
    casimir = _maxabs(rep.casimir().matrix - hb**2 * j * (j + 1) * np.eye(rep.dim))
    rz = rotation_generator(rep, "z")
    rl = max(
        _maxabs(commutator(rz, lx).matrix - 1j * ly.matrix),
        _maxabs(commutator(rz, ly).matrix + 1j * lx.matrix),
        _maxabs(commutator(rz, lz).matrix),
        max(_maxabs(rotation_generator(rep, a).matrix * hb - rep.component(a).matrix) for a in "xyz"),
    )
    gamma = float(np.max(np.abs(gamma_constants(rep))))
    return {"commutators": comm, "derivation": deriv, "casimir": casimir, "rotation-generators": rl, "gamma": gamma}


ANGULAR_TOLERANCE = {
    "commutators": 1e-12,
    "derivation": 1e-12,
    "casimir": 1e-10,
    "rotation-generators": 1e-12,
    "gamma": 1e-12,
}


def check_angular_representation(rep: SpinRepresentation) -> list[CheckResult]:
    """Angular identities of one (possibly perturbed) representation."""
    res = angular_residuals(rep)
    scale = {"rotation-generators": rep.hbar, "gamma": rep.hbar**2}
    return [
        CheckResult(
            "angular.%s" % key,
            value,
            ANGULAR_TOLERANCE[key] * scale.get(key, rep.hbar**2),
            "j = %s" % rep.j,
        )
        for key, value in res.items()
    ]


def spins_up_to(j_max) -> list[Fraction]:
    top = Fraction(j_max)
    if top > 10:
        raise ValueError("j_max must not exceed 10")
    return [Fraction(k, 2) for k in range(1, int(2 * top) + 1)]


def check_angular_suite(j_max=10, hbar: float = 1.0) -> list[CheckResult]:
    """Each identity, worst case over every half-integer ``j <= j_max``."""
    worst: dict[str, tuple[float, float, Fraction]] = {}
    for j in spins_up_to(j_max):
        for r in check_angular_representation(spin_operators(j, hbar)):
            ratio = r.measured / r.tolerance
            if r.name not in worst or ratio > worst[r.name][0] / worst[r.name][1]:
                worst[r.name] = (r.measured, r.tolerance, j)
    return [
        CheckResult(name, m, t, "worst at j = %s, j <= %s" % (j, Fraction(j_max))) for name, (m, t, j) in worst.items()
    ]


def check_rotation_group_identity(epsilons: Sequence[float] = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)) -> CheckResult:
    """``Rx(e)Ry(e) - Ry(e)Rx(e) - (Rz(e^2) - I)`` shrinks like ``e^3``."""
    res = []
    for e in epsilons:
        if not 0 < e <= 0.1:
            raise ValueError("epsilons must lie in (0, 0.1]")
        rx, ry = so3_rotation("x", e).matrix, so3_rotation("y", e).matrix
        res.append(np.linalg.norm(rx @ ry - ry @ rx - (so3_rotation("z", e * e).matrix - np.eye(3))))
    slope = log_log_slope(epsilons, res)
    return CheckResult("angular.so3-commutator-order", abs(slope - 3.0), 0.2, "fitted order %.4f" % slope)


def check_bloch_rotation(
    j=Fraction(1, 2),
    theta_list: Sequence[float] = (0.0, 0.3, 1.1, np.pi),
    hbar: float = 1.0,
    n_states: int = 100,
    seed: int = 0,
) -> CheckResult:
    """``<L>`` of ``exp(-i theta R_a) v`` is ``Rot_a(theta) <L>_v``."""
    rep = spin_operators(j, hbar)
    rng = np.random.default_rng(seed)
    states = [random_state(rep.dim, rng) for _ in range(n_states)]
    worst = 0.0
    for axis in "xyz":
        g = rotation_generator(rep, axis)
        spec = eigendecompose(g)
        for theta in theta_list:
            rot = so3_rotation(axis, theta).matrix
            for v in states:
                lhs = bloch_vector(rep, apply_generator(g, theta, v, spec))
                worst = max(worst, float(np.max(np.abs(lhs - rot @ bloch_vector(rep, v)))))
    return CheckResult("angular.bloch-rotation[j=%s]" % rep.j, worst, 1e-9 * hbar, "j = %s, %d states per axis and angle" % (rep.j, n_states))


# ---------------------------------------------------------------------------
# Poisson-bracket rule


def check_pb_rule(
    F: PhaseSpacePolynomial,
    H: PhaseSpacePolynomial,
    binding: Mapping[str, Operator],
    ctx: CommutationContext | None = None,
    params: Mapping[str, float] | None = None,
    states: Sequence[StateVector] | None = None,
    name: str | None = None,
) -> CheckResult:
    """``i hbar {F, H}^ = [F^, H^]``.

    Compared as matrices (finite-dimensional bindings) or, when ``states``
    is given, as expectations (grid bindings).  Raises NotSimple when any of
    ``F``, ``H`` or ``{F, H}`` is not simple in ``ctx``.
    """
    ctx = CommutationContext.canonical(F.pairs) if ctx is None else ctx
    bracket = poisson_bracket(F, H)
    polys = [F.to_ncpolynomial(), H.to_ncpolynomial(), bracket.to_ncpolynomial()]
    for p in polys:
        verdict = is_simple(p, ctx)
        if not verdict:
            raise NotSimple(verdict.witness)
    names = set().union(*(p.symbols() for p in polys)) or set(binding)
    sub = {n: binding[n] for n in names}
    f_op, h_op, b_op = (transcribe(p, ctx, sub, params) for p in polys)
    hbar = next(iter(sub.values())).hbar
    lhs = 1j * hbar * b_op.matrix
    rhs = commutator(f_op, h_op).matrix
    label = name or "pb.{%s, %s}" % (F.expr, H.expr)
    if states is None:
        scale = max(1.0, _maxabs(rhs), _maxabs(lhs))
        return CheckResult(label, _maxabs(lhs - rhs) / scale, 1e-9, "matrix comparison, {F,H} = %s" % bracket.expr)
    worst = max(abs(np.vdot(v.amplitudes, (lhs - rhs) @ v.amplitudes)) for v in states)
    return CheckResult(label, worst, 1e-6 * hbar, "expectations over %d states, {F,H} = %s" % (len(states), bracket.expr))


PB_GRID_TRIPLES = (
    ("x", "c*px", {"c": 1.3}),
    ("px", "px^2/(2*m)", {"m": 0.8}),
    ("x^2", "px", {}),
    ("x", "px^2/(2*m)", {"m": 0.8}),
    ("x^3", "k*x^2", {"k": 0.4}),
)
PB_MATRIX_TRIPLES = (
    ("px", "px^2/(2*m)", {"m": 0.8}),
    ("x^2 + x", "x^3", {}),
)


def check_pb_suite(grid: GridRepresentation | None = None, seed: int = 0) -> list[CheckResult]:
    grid = grid_representation(512, 20.0) if grid is None else grid
    states = _interior_states(grid, DEFAULT_FAMILY)
    out = []
    for f, h, params in PB_GRID_TRIPLES:
        out.append(
            check_pb_rule(
                PhaseSpacePolynomial.parse(f), PhaseSpacePolynomial.parse(h), grid.binding(), params=params,
                states=states, name="pb.grid {%s, %s}" % (f, h),
            )
        )
    rng = np.random.default_rng(seed)
    binding = {"x": random_hermitian(4, rng), "px": random_hermitian(4, rng)}
    ctx = CommutationContext(["x", "px"])
    for f, h, params in PB_MATRIX_TRIPLES:
        out.append(
            check_pb_rule(
                PhaseSpacePolynomial.parse(f), PhaseSpacePolynomial.parse(h), binding, ctx, params,
                name="pb.matrix {%s, %s}" % (f, h),
            )
        )
    return out


# ---------------------------------------------------------------------------
# operator rules and the AVCP engine


def commuting_pair(dim: int, rng: np.random.Generator, hbar: float = 1.0) -> tuple[Operator, Operator]:
    """Two Hermitian operators with a shared random eigenbasis."""
    q = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))[0]
    a = (q * rng.normal(size=dim)) @ q.conj().T
    b = (q * rng.normal(size=dim)) @ q.conj().T
    return Operator((a + a.conj().T) / 2, HERMITIAN, hbar), Operator((b + b.conj().T) / 2, HERMITIAN, hbar)


def check_operator_rules(n_trials: int = 20, seed: int = 0) -> list[CheckResult]:
    """Function, sum and product rules as matrix identities."""
    rng = np.random.default_rng(seed)
    fn = sm = pr = 0.0
    refused = 0
    for _ in range(n_trials):
        dim = int(rng.integers(2, 7))
        a, b = commuting_pair(dim, rng)
        c = random_hermitian(dim, rng)
        ctx = CommutationContext.from_operators({"a": a, "b": b, "c": c})
        f = parse_polynomial("a^3 - 2*a + 0.5")
        expect = function_of(a, lambda t: t**3 - 2 * t + 0.5).matrix
        fn = max(fn, _maxabs(transcribe(f, ctx, {"a": a}).matrix - expect) / max(1.0, _maxabs(expect)))
        s = transcribe(parse_polynomial("a + c"), ctx, {"a": a, "c": c}).matrix
        sm = max(sm, _maxabs(s - a.matrix - c.matrix))
        p = transcribe(parse_polynomial("a*b"), ctx, {"a": a, "b": b}).matrix
        pr = max(pr, _maxabs(p - a.matrix @ b.matrix) / max(1.0, _maxabs(p)))
        try:
            transcribe(parse_polynomial("a*c"), ctx, {"a": a, "c": c})
        except NotSimple:
            refused += 1
    return [
        CheckResult("rules.function", fn, 1e-10, "f(A) by words against f(A) by spectral calculus"),
        CheckResult("rules.sum", sm, 1e-10, "(a + c)^ = A + C"),
        CheckResult("rules.product", pr, 1e-10, "(a b)^ = AB for commuting A, B"),
        CheckResult(
            "rules.product-refusal", n_trials - refused, 0, "%d of %d non-commuting products refused" % (refused, n_trials)
        ),
    ]


def hermitization_gap(a: Operator, b: Operator) -> tuple[np.ndarray, np.ndarray]:
    """``A(AB)_h - (A^2)B_h`` and ``-1/4 [A, [A, B]]``."""
    am, bm = a.matrix, b.matrix
    ab_h = (am @ bm + bm @ am) / 2
    a_ab = (am @ ab_h + ab_h @ am) / 2
    a2_b = (am @ am @ bm + bm @ am @ am) / 2
    return a_ab - a2_b, -0.25 * commutator(a, commutator(a, b)).matrix


def check_hermitization_identity(n_trials: int = 100, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        dim = int(rng.integers(2, 9))
        a, b = random_hermitian(dim, rng), random_hermitian(dim, rng)
        gap, ref = hermitization_gap(a, b)
        worst = max(worst, _maxabs(gap - ref) / max(1.0, _maxabs(ref)))
    return CheckResult("rules.hermitization-gap", worst, 1e-12, "gap against -1/4 [A,[A,B]], relative")


SOUNDNESS_COMBINES = (
    ("a", "a^2 - 3*a"),
    ("a b", "a*b + 2*a - b^2"),
    ("a b", "a + b"),
    ("a b c", "a*b + c^2 - 0.5*c"),
    ("a c", "a^2 + 3*c - c^3"),
)


def random_soundness_case(rng: np.random.Generator):
    """A random simple combine with a binding of mixed commutation."""
    names, text = SOUNDNESS_COMBINES[int(rng.integers(len(SOUNDNESS_COMBINES)))]
    dim = int(rng.integers(2, 7))
    a, b = commuting_pair(dim, rng)
    pool = {"a": a, "b": b, "c": random_hermitian(dim, rng)}
    binding = {n: pool[n] for n in names.split()}
    arr = ClassicalArrangement([(n, 0.0) for n in binding], None, 0.0, parse_polynomial(text))
    return arr, binding, random_state(dim, rng)


def check_avcp_soundness(n_trials: int = 100, seed: int = 0) -> CheckResult:
    """Arrangement mean equals ``<f^>`` for random simple combines."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        arr, binding, v = random_soundness_case(rng)
        q = build_quantum_counterpart(arr, binding)
        ctx = CommutationContext.from_operators(binding)
        ref = expectation(transcribe(arr.combine, ctx, binding), v)
        worst = max(worst, abs(analytic_expected_output(q, v) - ref) / max(1.0, abs(ref)))
    return CheckResult("avcp.soundness", worst, 1e-9, "%d random arrangements" % n_trials)


def check_order_irrelevance(n_trials: int = 20, seed: int = 0) -> CheckResult:
    """Reordering commuting measurements on one copy changes nothing."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    f = parse_polynomial("a*b + a^2 - 2*b")
    for _ in range(n_trials):
        dim = int(rng.integers(2, 7))
        a, b = commuting_pair(dim, rng)
        v = random_state(dim, rng)
        e1 = analytic_expected_output(arrange({"a": a, "b": b}, f, [("a", "b")]), v)
        e2 = analytic_expected_output(arrange({"a": a, "b": b}, f, [("b", "a")]), v)
        worst = max(worst, abs(e1 - e2) / max(1.0, abs(e1)))
    return CheckResult("avcp.order-irrelevance", worst, 1e-12, "shared-copy orderings")


def check_representability(seed: int = 0) -> list[CheckResult]:
    """``A^2`` arrangements are represented by ``A^2``; ``(mean A)^2`` is not."""
    rng = np.random.default_rng(seed)
    a = random_hermitian(3, rng)
    single = build_quantum_counterpart(ClassicalArrangement([("a", 0.0)], None, 0.0, parse_polynomial("a^2")), {"a": a})
    yes = representing_operator(arrangement_functional(single), 3)
    err = _maxabs(yes.operator.matrix - a.matrix @ a.matrix) if yes else math.inf
    split = arrange({"a1": a, "a2": a}, parse_polynomial("a1*a2"), [("a1",), ("a2",)])
    no = representing_operator(arrangement_functional(split), 3)
    return [
        CheckResult("avcp.represent-a-squared", err, 1e-8, "reconstructed operator against A^2"),
        CheckResult("avcp.reject-mean-squared", 0.0 if not no else 1.0, 0.0, getattr(no, "reason", "accepted")),
    ]


# ---------------------------------------------------------------------------
# default suite


def _grid_group(j_max) -> list[CheckResult]:
    g = grid_representation(512, 20.0)
    out = [check_canonical_commutator(g), check_massive_commutator(g)]
    out += check_displacement_relations(g)
    out += [check_ehrenfest_free(g, 1.0), check_ehrenfest_order(g, 1.0)]
    out += check_minimal_coupling(g)
    return out


def _angular_group(j_max) -> list[CheckResult]:
    out = check_angular_suite(j_max)
    out.append(check_rotation_group_identity())
    top = spins_up_to(j_max)[-1]
    out += [check_bloch_rotation(j) for j in sorted({Fraction(1, 2), min(Fraction(3, 2), top), top})]
    return out


def _rules_group(j_max) -> list[CheckResult]:
    return check_operator_rules() + [check_hermitization_identity()]


def _avcp_group(j_max) -> list[CheckResult]:
    return [check_avcp_soundness(), check_order_irrelevance()] + check_representability()


def _pb_group(j_max) -> list[CheckResult]:
    return check_pb_suite()


GROUPS: dict[str, Callable[..., list[CheckResult]]] = {
    "rules": _rules_group,
    "grid": _grid_group,
    "angular": _angular_group,
    "pb": _pb_group,
    "avcp": _avcp_group,
}


def run_suite(only: Sequence[str] | None = None, j_max=10) -> list[CheckResult]:
    """Run the named groups (all by default) in a fixed order."""
    names = list(GROUPS) if not only else list(only)
    for n in names:
        if n not in GROUPS:
            raise UnknownCheckName("unknown check group %r; choose from %s" % (n, ", ".join(GROUPS)))
    out = []
    for n in names:
        out.extend(GROUPS[n](j_max))
    return out
