"""Dense operator core: operators, pure states, spectra and projective measurement.

Every object here is immutable after construction.  Hermiticity and
unitarity are asserted once, when an :class:`Operator` is built, so the
operations below only check the role flag.

Spectral decomposition is the single primitive used for functions of
operators, exponentials and sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatch,
    NotHermitian,
    NotNormalized,
    NotUnitary,
    ScaleMismatch,
    ZeroProjection,
)

HERMITIAN = "hermitian"
UNITARY = "unitary"
GENERAL = "general"
KINDS = (HERMITIAN, UNITARY, GENERAL)

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-12
NORM_ATOL = 1e-12
ZERO_PROJECTION = 1e-14


def _frozen(array, dtype=complex):
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Operator:
    """A dense square matrix together with its role and hbar scale.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix.
    kind : {"hermitian", "unitary", "general"}
        Asserted role.  Hermitian operators must equal their conjugate
        transpose entrywise within 1e-12; unitary ones must satisfy
        ``U^dag U = I`` within 1e-12.
    hbar : float
        Positive scale carried alongside the matrix.  Binary operations
        refuse to mix scales.
    """

    matrix: np.ndarray
    kind: str = GENERAL
    hbar: float = 1.0

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionMismatch("operator must be a non-empty square matrix, got shape %s" % (m.shape,))
        if self.kind not in KINDS:
            raise ValueError("unknown operator kind %r" % self.kind)
        if not (float(self.hbar) > 0):
            raise ValueError("hbar must be positive")
        if self.kind == HERMITIAN:
            dev = np.max(np.abs(m - m.conj().T))
            if dev > HERMITIAN_ATOL:
                raise NotHermitian("matrix deviates from its adjoint by %.3e" % dev)
        elif self.kind == UNITARY:
            dev = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
            if dev > UNITARY_ATOL:
                raise NotUnitary("U^dag U deviates from identity by %.3e" % dev)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_hermitian(self) -> bool:
        return self.kind == HERMITIAN

    def dag(self) -> "Operator":
        kind = self.kind if self.kind != GENERAL else GENERAL
        return Operator(self.matrix.conj().T, kind, self.hbar)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def as_hermitian(self, rtol: float = 1e-10) -> "Operator":
        """Promote to a Hermitian operator after checking it is one.

        The deviation from the adjoint must be below
        ``rtol * max(1, max|entry|)``; the stored matrix is then the exact
        Hermitian part.
        """
        return hermitian(self.matrix, self.hbar, rtol=rtol)

    def _check_compatible(self, other: "Operator"):
        if self.dim != other.dim:
            raise DimensionMismatch("dimensions %d and %d differ" % (self.dim, other.dim))
        if self.hbar != other.hbar:
            raise ScaleMismatch("hbar scales %g and %g differ" % (self.hbar, other.hbar))

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check_compatible(other)
            both = self.kind == HERMITIAN and other.kind == HERMITIAN
            return Operator(self.matrix + other.matrix, HERMITIAN if both else GENERAL, self.hbar)
        if isinstance(other, Number):
            return self + other * identity(self.dim, self.hbar)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        kind = HERMITIAN if self.kind == HERMITIAN else GENERAL
        return Operator(-self.matrix, kind, self.hbar)

    def __sub__(self, other):
        if isinstance(other, (Operator, Number)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        keep = self.kind == HERMITIAN and complex(scalar).imag == 0
        return Operator(self.matrix * scalar, HERMITIAN if keep else GENERAL, self.hbar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check_compatible(other)
            return Operator(self.matrix @ other.matrix, GENERAL, self.hbar)
        if isinstance(other, StateVector):
            if other.dim != self.dim:
                raise DimensionMismatch("operator dim %d vs state dim %d" % (self.dim, other.dim))
            return self.matrix @ other.amplitudes
        return NotImplemented

    def __repr__(self):
        return "Operator(dim=%d, kind=%s, hbar=%g)" % (self.dim, self.kind, self.hbar)


def hermitian(matrix, hbar: float = 1.0, rtol: float = 1e-10) -> Operator:
    """Build a Hermitian operator from a matrix that is Hermitian up to rounding."""
    m = np.asarray(matrix, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > rtol * scale:
        raise NotHermitian("matrix deviates from its adjoint by %.3e (scale %.3e)" % (dev, scale))
    return Operator((m + m.conj().T) / 2, HERMITIAN, hbar)


def identity(dim: int, hbar: float = 1.0) -> Operator:
    return Operator(np.eye(dim), HERMITIAN, hbar)


def zero(dim: int, hbar: float = 1.0) -> Operator:
    return Operator(np.zeros((dim, dim)), HERMITIAN, hbar)


@dataclass(frozen=True, eq=False)
class StateVector:
    """A unit-norm complex vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes)
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatch("state must be a non-empty vector")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > NORM_ATOL:
            raise NotNormalized("state norm is %.16g" % norm)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, amplitudes) -> "StateVector":
        a = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise NotNormalized("cannot normalize the zero vector")
        return cls(a / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        a = np.zeros(dim, dtype=complex)
        a[index] = 1.0
        return cls(a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return "StateVector(dim=%d)" % self.dim


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector.normalized(z)


def random_hermitian(dim: int, rng: np.random.Generator, hbar: float = 1.0, scale: float = 1.0) -> Operator:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator(scale * (z + z.conj().T) / 2, HERMITIAN, hbar)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _require_hermitian(a: Operator):
    if a.kind != HERMITIAN:
        raise NotHermitian("operator of kind %r where a Hermitian one is required" % a.kind)


def _require_state(a: Operator, v: StateVector):
    if a.dim != v.dim:
        raise DimensionMismatch("operator dim %d vs state dim %d" % (a.dim, v.dim))


def commutator(a: Operator, b: Operator) -> Operator:
    """Return ``AB - BA`` as a general operator."""
    a._check_compatible(b)
    return Operator(a.matrix @ b.matrix - b.matrix @ a.matrix, GENERAL, a.hbar)


def anticommutator(a: Operator, b: Operator) -> Operator:
    a._check_compatible(b)
    return Operator(a.matrix @ b.matrix + b.matrix @ a.matrix, GENERAL, a.hbar)


def mean_value(a: Operator, v: StateVector) -> complex:
    """``v^dag A v`` for any operator (complex in general)."""
    _require_state(a, v)
    return complex(np.vdot(v.amplitudes, a.matrix @ v.amplitudes))


def expectation(a: Operator, v: StateVector) -> float:
    """Real expectation value of a Hermitian operator."""
    _require_hermitian(a)
    value = mean_value(a, v)
    if abs(value.imag) > 1e-10 * max(1.0, a.max_abs()):
        raise NotHermitian("expectation has imaginary part %.3e" % value.imag)
    return value.real


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-data of a Hermitian operator.

    ``eigenvalues`` ascend; ``eigenvectors`` holds them as columns;
    ``eigenspaces`` partitions the column indices into groups whose
    eigenvalues agree within the degeneracy tolerance, and ``levels``
    holds the representative value of each group.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    eigenspaces: tuple
    levels: np.ndarray
    hbar: float = 1.0

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def projector(self, k: int) -> np.ndarray:
        vk = self.eigenvectors[:, list(self.eigenspaces[k])]
        return vk @ vk.conj().T

    def weights(self, v: StateVector) -> np.ndarray:
        """Born probability of each eigenspace in state ``v``."""
        if v.dim != self.dim:
            raise DimensionMismatch("spectrum dim %d vs state dim %d" % (self.dim, v.dim))
        amp2 = np.abs(self.eigenvectors.conj().T @ v.amplitudes) ** 2
        return np.array([amp2[list(idx)].sum() for idx in self.eigenspaces])

    def project(self, k: int, v: StateVector) -> np.ndarray:
        """Unnormalized projection of ``v`` onto eigenspace ``k``."""
        vk = self.eigenvectors[:, list(self.eigenspaces[k])]
        return vk @ (vk.conj().T @ v.amplitudes)

    def function(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Matrix of ``f(A) = sum_i f(a_i) v_i v_i^dag``."""
        vals = np.asarray(f(self.eigenvalues))
        return (self.eigenvectors * vals) @ self.eigenvectors.conj().T


def eigendecompose(a: Operator, degeneracy_tol: float | None = None) -> Spectrum:
    """Spectral decomposition with degenerate eigenvalues grouped.

    The default tolerance is ``1e-9 * max(1, ||A||)``.  Grouping is
    anchored on the first (smallest) eigenvalue of each group.
    """
    _require_hermitian(a)
    w, v = np.linalg.eigh(a.matrix)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    tol = 1e-9 * max(1.0, norm) if degeneracy_tol is None else float(degeneracy_tol)
    groups = []
    current = [0]
    for i in range(1, len(w)):
        if w[i] - w[current[0]] <= tol:
            current.append(i)
        else:
            groups.append(tuple(current))
            current = [i]
    groups.append(tuple(current))
    levels = np.array([w[list(g)].mean() for g in groups])
    return Spectrum(_frozen(w, float), _frozen(v), tuple(groups), _frozen(levels, float), a.hbar)


def function_of(a: Operator, f: Callable[[np.ndarray], np.ndarray], spectrum: Spectrum | None = None) -> Operator:
    """``f(A)`` via the spectral decomposition; Hermitian when ``f`` is real."""
    spec = spectrum if spectrum is not None else eigendecompose(a)
    m = spec.function(f)
    if np.iscomplexobj(np.asarray(f(spec.eigenvalues))):
        return Operator(m, GENERAL, a.hbar)
    return hermitian(m, a.hbar)


def unitary_exp(g: Operator, theta: float, spectrum: Spectrum | None = None) -> Operator:
    """``exp(-i theta G)`` for Hermitian ``G`` (no hbar factor)."""
    _require_hermitian(g)
    spec = spectrum if spectrum is not None else eigendecompose(g)
    m = spec.function(lambda lam: np.exp(-1j * theta * lam))
    return Operator(m, UNITARY, g.hbar)


def apply_generator(g: Operator, theta: float, v: StateVector, spectrum: Spectrum | None = None) -> StateVector:
    """Apply ``exp(-i theta G)`` to ``v`` without forming the matrix."""
    _require_hermitian(g)
    _require_state(g, v)
    spec = spectrum if spectrum is not None else eigendecompose(g)
    vecs = spec.eigenvectors
    out = vecs @ (np.exp(-1j * theta * spec.eigenvalues) * (vecs.conj().T @ v.amplitudes))
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > 1e-10:
        raise NotNormalized("evolution lost norm: %.16g" % norm)
    return StateVector(out / norm)


def evolve(v: StateVector, h: Operator, dt: float, spectrum: Spectrum | None = None) -> StateVector:
    """``exp(-i H dt / hbar) v`` via the spectral decomposition of ``H``."""
    if dt == 0:
        _require_hermitian(h)
        _require_state(h, v)
        return v
    return apply_generator(h, dt / h.hbar, v, spectrum)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome_index: int
    value: float
    probability: float
    post_state: StateVector


def sample_outcome(spec: Spectrum, v: StateVector, rng: np.random.Generator) -> MeasurementRecord:
    """Draw one projective-measurement outcome and collapse the state.

    Outcomes are eigenspaces; the post-measurement state is the normalized
    projection of ``v`` onto the drawn eigenspace.
    """
    probs = spec.weights(v)
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    k = int(min(np.searchsorted(cdf, u, side="right"), len(probs) - 1))
    proj = spec.project(k, v)
    norm = np.linalg.norm(proj)
    if norm < ZERO_PROJECTION:
        raise ZeroProjection("outcome %d drawn with projection norm %.3e" % (k, norm))
    return MeasurementRecord(k, float(spec.levels[k]), float(probs[k]), StateVector(proj / norm))
