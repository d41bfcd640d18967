"""Scenario, context and matrix files.

Scenario and context files are TOML.  A context file describes a
representation; a scenario file is a context plus an arrangement.  Keys::

    representation = "spin"     # spin | grid | matrix
    j = 1                       # spin only; "1/2" style strings accepted
    hbar = 1.0

    [grid]                      # grid only
    n = 64
    length = 20.0

    [matrices]                  # matrix only: operator name -> matrix file
    A = "a.txt"

    [params]                    # scalar parameters of expressions
    c = 1.0

    # scenario keys
    name = "example"
    combine = "a1*a2"           # polynomial over the input names
    copies = [["a1"], ["a2"]]   # optional explicit layout
    seed = 1234                 # optional, see the CLI for precedence
    n_runs = 100000
    hamiltonian = "c*px"        # optional, over the representation's operators
    output = "x"                # optional output measurement at t2

    [inputs]                    # input name -> operator name
    a1 = "Lz"
    a2 = "Lz"

    [times]
    t0 = 0.0
    t1 = 0.0
    t2 = 0.0

    [state]                     # random | basis | amplitudes | wavepacket
    kind = "random"
    seed = 0

    [wavepacket]                # state.kind = "wavepacket"
    center = 0.0
    width = 1.25
    k0 = 0.0

Spin representations expose ``Lx``, ``Ly``, ``Lz``; grids expose ``x`` and
``px``.  Matrix files hold one row per line, each entry written as a
``re im`` pair; blank lines and text after ``#`` are ignored.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .algebra import CommutationContext, NCPolynomial, ObservableSymbol, parse_polynomial, transcribe
from .arrangements import ClassicalArrangement, QuantumArrangement, arrange, build_quantum_counterpart
from .errors import ParseError
from .operators import HERMITIAN, Operator, StateVector, hermitian, random_state
from .representations import gaussian_wavepacket, grid_representation, spin_operators


def read_matrix(path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        text = line.split("#", 1)[0].split()
        if not text:
            continue
        if len(text) % 2:
            raise ParseError("matrix row needs re/im pairs", lineno, 1)
        try:
            vals = [float(t) for t in text]
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from None
        rows.append([complex(vals[k], vals[k + 1]) for k in range(0, len(vals), 2)])
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError("matrix file must hold a square matrix")
    return np.array(rows, dtype=complex)


def write_matrix(path, m) -> None:
    lines = ["  ".join("%.17g %.17g" % (z.real, z.imag) for z in row) for row in np.asarray(m, dtype=complex)]
    Path(path).write_text("\n".join(lines) + "\n")


def loads(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None) or 1
        col = getattr(exc, "colno", None) or 1
        raise ParseError(getattr(exc, "msg", str(exc)).split(" (at")[0], line, col) from None


def load_config(path) -> dict:
    return loads(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class Context:
    """Operators available to expressions, with their commutation facts."""

    operators: Mapping[str, Operator]
    ctx: CommutationContext
    params: Mapping[str, float]
    kind: str
    grid: object = None
    spin: object = None

    @property
    def hbar(self) -> float:
        return next(iter(self.operators.values())).hbar

    @property
    def dim(self) -> int:
        return next(iter(self.operators.values())).dim

    def parse(self, text: str) -> NCPolynomial:
        return parse_polynomial(text, observables=set(self.operators), params=set(self.params))


def _params(cfg) -> dict[str, float]:
    out = {}
    for k, v in dict(cfg.get("params", {})).items():
        if not isinstance(v, (int, float)):
            raise ParseError("parameter %s must be a number" % k)
        out[str(k)] = float(v)
    return out


def build_context(cfg: Mapping, base_dir: Path | None = None) -> Context:
    kind = cfg.get("representation")
    hbar = float(cfg.get("hbar", 1.0))
    params = _params(cfg)
    if kind == "spin":
        spin = spin_operators(str(cfg.get("j", "1/2")), hbar)
        ops = spin.binding()
        ctx = CommutationContext.from_operators(ops, roles={n: "angular_momentum" for n in ops})
        return Context(ops, ctx, params, kind, spin=spin)
    if kind == "grid":
        g = dict(cfg.get("grid", {}))
        grid = grid_representation(int(g.get("n", 512)), float(g.get("length", 20.0)), hbar)
        return Context(grid.binding(), CommutationContext.canonical(), params, kind, grid=grid)
    if kind == "matrix":
        base = base_dir or Path(".")
        files = dict(cfg.get("matrices", {}))
        if not files:
            raise ParseError("a matrix representation needs a [matrices] table")
        ops = {str(n): hermitian(read_matrix(base / f), hbar) for n, f in files.items()}
        return Context(ops, CommutationContext.from_operators(ops), params, kind)
    raise ParseError("representation must be spin, grid or matrix, got %r" % (kind,))


def context_from_flags(spin=None, grid=None, length: float = 20.0, hbar: float = 1.0, params=None) -> Context:
    if spin is not None:
        cfg = {"representation": "spin", "j": str(spin), "hbar": hbar}
    else:
        cfg = {"representation": "grid", "grid": {"n": int(grid), "length": length}, "hbar": hbar}
    cfg["params"] = dict(params or {})
    return build_context(cfg)


@dataclass(eq=False)
class Scenario:
    name: str
    context: Context
    inputs: dict
    combine: NCPolynomial
    copies: tuple | None
    seed: int | None
    n_runs: int
    times: tuple
    hamiltonian: Operator | None
    output: Operator | None
    state: StateVector
    raw: dict = field(default_factory=dict, repr=False)

    def binding(self) -> dict[str, Operator]:
        return {n: self.context.operators[op] for n, op in self.inputs.items()}

    def arrangement(self) -> QuantumArrangement:
        binding = self.binding()
        t0, t1, t2 = self.times
        if self.copies is not None:
            return arrange(
                binding, self.combine, self.copies, output=self.output, hamiltonian=self.hamiltonian,
                times=self.times, params=self.context.params,
            )
        arr = ClassicalArrangement(
            [(ObservableSymbol(n), t1) for n in self.inputs], None, t2, self.combine
        )
        return build_quantum_counterpart(
            arr, binding, output=self.output, hamiltonian=self.hamiltonian, t0=t0, params=self.context.params
        )


def _state(cfg, context: Context) -> StateVector:
    st = dict(cfg.get("state", {}))
    kind = st.get("kind", "random")
    dim = context.dim
    if kind == "random":
        return random_state(dim, np.random.default_rng(int(st.get("seed", 0))))
    if kind == "basis":
        return StateVector.basis(dim, int(st.get("index", 0)))
    if kind == "amplitudes":
        amps = [complex(*pair) if isinstance(pair, list) else complex(pair) for pair in st.get("amplitudes", [])]
        if len(amps) != dim:
            raise ParseError("state.amplitudes needs %d entries" % dim)
        return StateVector.normalized(amps)
    if kind == "wavepacket":
        if context.grid is None:
            raise ParseError("wavepacket states need a grid representation")
        wp = dict(cfg.get("wavepacket", {}))
        grid = context.grid
        return gaussian_wavepacket(
            grid, float(wp.get("center", 0.0)), float(wp.get("width", grid.length / 16)), float(wp.get("k0", 0.0))
        )
    raise ParseError("unknown state kind %r" % (kind,))


def _operator(cfg, key: str, context: Context) -> Operator | None:
    if key not in cfg:
        return None
    op = transcribe(context.parse(str(cfg[key])), context.ctx, context.operators, context.params)
    if op.kind != HERMITIAN:
        raise ParseError("%s is not Hermitian" % key)
    return op


def load_scenario(path) -> Scenario:
    path = Path(path)
    cfg = load_config(path)
    return scenario_from_config(cfg, path.parent, path.stem)


def scenario_from_config(cfg: Mapping, base_dir: Path | None = None, default_name: str = "scenario") -> Scenario:
    context = build_context(cfg, base_dir)
    inputs = {str(k): str(v) for k, v in dict(cfg.get("inputs", {})).items()}
    if not inputs:
        raise ParseError("a scenario needs an [inputs] table")
    unknown = sorted(v for v in inputs.values() if v not in context.operators)
    if unknown:
        raise ParseError("unknown operator(s) %s; available: %s" % (", ".join(unknown), ", ".join(context.operators)))
    if "combine" not in cfg:
        raise ParseError("a scenario needs a combine expression")
    combine = parse_polynomial(str(cfg["combine"]), observables=set(inputs), params=set(context.params))
    copies = cfg.get("copies")
    copies = tuple(tuple(str(n) for n in c) for c in copies) if copies is not None else None
    times = dict(cfg.get("times", {}))
    t1 = float(times.get("t1", 0.0))
    t = (float(times.get("t0", t1)), t1, float(times.get("t2", t1)))
    ham = _operator(cfg, "hamiltonian", context)
    out = _operator(cfg, "output", context)
    seed = cfg.get("seed")
    n_runs = int(cfg.get("n_runs", 100_000))
    if n_runs < 1:
        raise ParseError("n_runs must be at least 1")
    return Scenario(
        name=str(cfg.get("name", default_name)),
        context=context,
        inputs=inputs,
        combine=combine,
        copies=copies,
        seed=None if seed is None else int(seed),
        n_runs=n_runs,
        times=t,
        hamiltonian=ham,
        output=out,
        state=_state(cfg, context),
        raw=dict(cfg),
    )


def shipped_scenarios() -> list[str]:
    root = resources.files("avcp") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def resolve_scenario(name_or_path: str) -> Path:
    """A path on disk, or the name of a shipped scenario."""
    p = Path(name_or_path)
    if p.exists():
        return p
    shipped = resources.files("avcp") / "scenarios" / (name_or_path + ".toml")
    if shipped.is_file():
        return Path(str(shipped))
    raise FileNotFoundError("no scenario file or shipped scenario named %r" % name_or_path)
