"""Concrete operator families.

* spin-j angular momentum in the ``Lz`` eigenbasis (``m`` descending),
* position / momentum / displacement on a periodic grid with spectral
  momentum,
* minimal-coupling kinetic momentum,
* classical SO(3) rotation matrices,
* tensor-product lifting of single-factor operators.

The additive constants that appear when generators are fixed only up to a
multiple of the identity are taken to be zero throughout: a constant adds a
global phase to every transformed state and has no observable effect.
:func:`gamma_constants` reports them for a built representation so the
choice can be checked rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .algebra import PhaseSpacePolynomial, param
from .errors import BoundaryLeak, InvalidGrid, InvalidSpin, SlotMismatch
from .operators import GENERAL, HERMITIAN, Operator, StateVector, commutator, expectation

AXES = ("x", "y", "z")


# ---------------------------------------------------------------------------
# spin


@dataclass(frozen=True, eq=False)
class SpinRepresentation:
    j: Fraction
    hbar: float
    Lx: Operator
    Ly: Operator
    Lz: Operator

    @property
    def dim(self) -> int:
        return int(2 * self.j + 1)

    def component(self, axis: str) -> Operator:
        return {"x": self.Lx, "y": self.Ly, "z": self.Lz}[axis]

    def binding(self) -> dict[str, Operator]:
        return {"Lx": self.Lx, "Ly": self.Ly, "Lz": self.Lz}

    def casimir(self) -> Operator:
        return Operator(
            self.Lx.matrix @ self.Lx.matrix + self.Ly.matrix @ self.Ly.matrix + self.Lz.matrix @ self.Lz.matrix,
            GENERAL,
            self.hbar,
        ).as_hermitian()


def _as_spin(j) -> Fraction:
    try:
        value = Fraction(j) if not isinstance(j, str) else Fraction(j.strip())
    except (TypeError, ValueError):
        raise InvalidSpin("cannot read spin %r" % (j,)) from None
    if value <= 0 or (2 * value).denominator != 1:
        raise InvalidSpin("2j must be a positive integer, got j=%s" % value)
    return value


def spin_operators(j, hbar: float = 1.0) -> SpinRepresentation:
    """Spin-j matrices from the ladder construction.

    Basis states are ordered ``m = j, j-1, ..., -j`` so that ``Lz`` is
    diagonal and descending.
    """
    jj = _as_spin(j)
    jf = float(jj)
    m = jf - np.arange(int(2 * jj) + 1)
    # <m+1| J+ |m> sits one row above the diagonal
    raise_amp = np.sqrt(jf * (jf + 1) - m[1:] * (m[1:] + 1))
    jplus = np.diag(raise_amp, 1).astype(complex)
    jminus = jplus.conj().T
    lx = hbar * (jplus + jminus) / 2
    ly = hbar * (jplus - jminus) / 2j
    lz = hbar * np.diag(m).astype(complex)
    return SpinRepresentation(
        jj,
        float(hbar),
        Operator(lx, HERMITIAN, hbar),
        Operator(ly, HERMITIAN, hbar),
        Operator(lz, HERMITIAN, hbar),
    )


def rotation_generator(rep: SpinRepresentation, axis: str) -> Operator:
    """``R_a = L_a / hbar``."""
    if axis not in AXES:
        raise ValueError("axis must be one of x, y, z")
    op = rep.component(axis)
    return Operator(op.matrix / rep.hbar, HERMITIAN, rep.hbar)


def bloch_vector(rep: SpinRepresentation, v: StateVector) -> np.ndarray:
    """``(<Lx>, <Ly>, <Lz>)`` in state ``v``."""
    return np.array([expectation(rep.Lx, v), expectation(rep.Ly, v), expectation(rep.Lz, v)])


def gamma_constants(rep: SpinRepresentation) -> np.ndarray:
    """Real ``gamma_k`` in ``[La, Lb] = i hbar Lc + i gamma_k I`` for (x,y,z) cyclic."""
    out = []
    for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
        rest = commutator(rep.component(a), rep.component(b)).matrix - 1j * rep.hbar * rep.component(c).matrix
        out.append((np.trace(rest) / (1j * rep.dim)).real)
    return np.array(out)


# ---------------------------------------------------------------------------
# periodic grid


@dataclass(frozen=True, eq=False)
class GridRepresentation:
    """Position, momentum and displacement on ``n`` points of a periodic box.

    Positions are ``x_j = -length/2 + j*dx``.  Momentum is diagonal in the
    discrete Fourier basis with eigenvalues ``hbar*k``, ``k`` the signed FFT
    frequencies times ``2*pi/length``; ``D = p/hbar``.
    """

    n: int
    length: float
    hbar: float
    positions: np.ndarray
    wavenumbers: np.ndarray
    x: Operator
    p: Operator
    D: Operator

    @property
    def dx(self) -> float:
        return self.length / self.n

    def binding(self) -> dict[str, Operator]:
        return {"x": self.x, "px": self.p}


def grid_representation(n: int, length: float, hbar: float = 1.0) -> GridRepresentation:
    if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
        raise InvalidGrid("n must be a power of two >= 8, got %r" % (n,))
    if not length > 0:
        raise InvalidGrid("length must be positive")
    n = int(n)
    dx = length / n
    xs = -length / 2 + dx * np.arange(n)
    k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    # columns are images of basis vectors: D e_j = ifft(k * fft(e_j))
    dmat = np.fft.ifft(k[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)
    dmat = (dmat + dmat.conj().T) / 2
    D = Operator(dmat, HERMITIAN, hbar)
    p = Operator(hbar * dmat, HERMITIAN, hbar)
    x = Operator(np.diag(xs).astype(complex), HERMITIAN, hbar)
    xs.setflags(write=False)
    k.setflags(write=False)
    return GridRepresentation(n, float(length), float(hbar), xs, k, x, p, D)


def plane_wave(grid: GridRepresentation, mode: int) -> StateVector:
    """``exp(i k x)`` with ``k = 2*pi*mode/length``."""
    k = 2 * np.pi * mode / grid.length
    return StateVector.normalized(np.exp(1j * k * grid.positions))


def gaussian_wavepacket(grid: GridRepresentation, center: float = 0.0, width: float | None = None, k0: float = 0.0) -> StateVector:
    """``exp(-(x-center)^2 / (2 width^2) + i k0 x)``, normalized on the grid."""
    width = grid.length / 16 if width is None else width
    x = grid.positions
    return StateVector.normalized(np.exp(-((x - center) ** 2) / (2 * width**2) + 1j * k0 * x))


def boundary_leak(grid: GridRepresentation, v: StateVector) -> float:
    """Amplitude at the box edges relative to the peak amplitude."""
    a = np.abs(v.amplitudes)
    return float(max(a[0], a[-1]) / a.max())


def require_interior(grid: GridRepresentation, v: StateVector, tol: float = 1e-12) -> None:
    leak = boundary_leak(grid, v)
    if leak > tol:
        raise BoundaryLeak("wavepacket amplitude at the boundary is %.3e of its peak" % leak)


@dataclass(frozen=True)
class WavepacketFamily:
    """Gaussian test states used for expectation-based grid identities.

    Widths and centres are fractions of the box length; ``modes`` are carrier
    wavenumbers in units of ``2*pi/length``.  Every member of the default
    family has boundary amplitude below 3e-13 of its peak.
    """

    width_fractions: tuple = (1 / 16, 1 / 20, 1 / 24)
    center_fractions: tuple = (-1 / 40, 0.0, 1 / 40)
    modes: tuple = (0, 3, -5)

    def states(self, grid: GridRepresentation) -> list[StateVector]:
        out = []
        for w in self.width_fractions:
            for c in self.center_fractions:
                for mode in self.modes:
                    out.append(
                        gaussian_wavepacket(grid, c * grid.length, w * grid.length, 2 * np.pi * mode / grid.length)
                    )
        return out


DEFAULT_FAMILY = WavepacketFamily()


def minimal_coupling_momentum(
    grid: GridRepresentation,
    vector_potential: PhaseSpacePolynomial,
    charge: float,
    mass: float = 1.0,
) -> Operator:
    """Kinetic momentum ``m xdot = p - e A(x)``.

    ``vector_potential`` must depend on ``x`` only.  The mass is not needed
    to build the operator, which is the product ``m xdot``; it is validated so
    callers can divide by it for the velocity.
    """
    if not mass > 0:
        raise ValueError("mass must be positive")
    coords = {n for pair in vector_potential.pairs for n in pair}
    used = {s.name for s in vector_potential.expr.free_symbols} & coords
    if not used <= {"x"}:
        raise ValueError("vector potential must be a function of x only")
    params = {s for s in vector_potential.expr.free_symbols if s.name not in coords}
    if params:
        raise ValueError("vector potential has unresolved parameters: %s" % sorted(map(str, params)))
    fn = sympy.lambdify(param("x"), vector_potential.expr, "numpy")
    values = np.broadcast_to(np.asarray(fn(grid.positions), dtype=float), grid.positions.shape)
    return Operator(grid.p.matrix - charge * np.diag(values), HERMITIAN, grid.hbar)


# ---------------------------------------------------------------------------
# classical rotations


@dataclass(frozen=True, eq=False)
class RotationMatrix3:
    matrix: np.ndarray
    axis: str
    angle: float

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if np.max(np.abs(m.T @ m - np.eye(3))) > 1e-12 or abs(np.linalg.det(m) - 1) > 1e-12:
            raise ValueError("not a proper rotation matrix")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        if isinstance(other, RotationMatrix3):
            return self.matrix @ other.matrix
        return self.matrix @ np.asarray(other)


def so3_rotation(axis: str, angle: float) -> RotationMatrix3:
    """Right-handed (counter-clockwise) rotation by ``angle`` about ``axis``."""
    if axis not in AXES:
        raise ValueError("axis must be one of x, y, z")
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        m = [[1, 0, 0], [0, c, -s], [0, s, c]]
    elif axis == "y":
        m = [[c, 0, s], [0, 1, 0], [-s, 0, c]]
    else:
        m = [[c, -s, 0], [s, c, 0], [0, 0, 1]]
    return RotationMatrix3(np.array(m), axis, float(angle))


# ---------------------------------------------------------------------------
# composite systems


def tensor_lift(a: Operator, slot: int, dims: Sequence[int]) -> Operator:
    """``I x ... x A x ... x I`` with ``A`` in position ``slot``."""
    dims = list(dims)
    if not 0 <= slot < len(dims) or dims[slot] != a.dim:
        raise SlotMismatch("slot %d of %s cannot hold an operator of dim %d" % (slot, dims, a.dim))
    m = np.ones((1, 1), dtype=complex)
    for i, d in enumerate(dims):
        m = np.kron(m, a.matrix if i == slot else np.eye(d))
    return Operator(m, a.kind, a.hbar)


def product_state(*states: StateVector) -> StateVector:
    amp = np.ones(1, dtype=complex)
    for s in states:
        amp = np.kron(amp, s.amplitudes)
    return StateVector.normalized(amp)
