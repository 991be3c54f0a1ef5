"""Finite-dimensional pure states, Hermitian observables and their moments.

Natural units (hbar = 1) are used throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
IMAG_TOL = 1e-10
VARIANCE_FLOOR = -1e-12

# Additive slack for inequality checks, and the equality rule max(1e-10, 1e-9*scale).
INEQUALITY_SLACK = 1e-10


def equality_tolerance(*values: float) -> float:
    scale = max((abs(v) for v in values), default=0.0)
    return max(1e-10, 1e-9 * scale)


class DimensionMismatchError(ValueError):
    """Operands live in Hilbert spaces of different dimension."""


class HermiticityError(ValueError):
    """A matrix handed in as an observable is not self-adjoint."""


class NormalizationError(ValueError):
    pass


class NumericalError(ArithmeticError):
    """Roundoff produced a value that cannot be explained by roundoff alone."""


class ResourceGuardError(ValueError):
    """A dense computation would exceed its configured size guard."""


ArrayLike = Union[Sequence[complex], np.ndarray]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state |psi> of a ``dim``-level system."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("a state needs a non-empty 1-d amplitude array")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm is {norm!r}, expected 1 within {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes: ArrayLike) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        _same_dim(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def with_phase(self, phi: float) -> "StateVector":
        return StateVector(np.exp(1j * phi) * self.amplitudes)


@dataclass(frozen=True, eq=False)
class HermitianObservable:
    """Dense self-adjoint matrix. Hermiticity is checked once, here."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"observable must be a non-empty square matrix, got shape {m.shape}")
        residual = float(np.max(np.abs(m - m.conj().T)))
        if residual > HERMITIAN_TOL:
            raise HermiticityError(f"Hermiticity residual {residual:.3e} exceeds {HERMITIAN_TOL}")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def _trusted(cls, matrix: np.ndarray) -> "HermitianObservable":
        # Closed operations (sums, real scalings) of Hermitian matrices skip revalidation.
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", _frozen(np.asarray(matrix, dtype=np.complex128)))
        return obj

    @classmethod
    def identity(cls, dim: int) -> "HermitianObservable":
        return cls._trusted(np.eye(dim, dtype=np.complex128))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "HermitianObservable":
        return cls._trusted(np.diag(np.asarray(values, dtype=np.float64)).astype(np.complex128))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __add__(self, other: "HermitianObservable") -> "HermitianObservable":
        _same_dim(self, other)
        return HermitianObservable._trusted(self.matrix + other.matrix)

    def __sub__(self, other: "HermitianObservable") -> "HermitianObservable":
        _same_dim(self, other)
        return HermitianObservable._trusted(self.matrix - other.matrix)

    def __neg__(self) -> "HermitianObservable":
        return HermitianObservable._trusted(-self.matrix)

    def __mul__(self, scalar: float) -> "HermitianObservable":
        if isinstance(scalar, complex) or np.iscomplexobj(scalar):
            raise TypeError("only real scalars preserve Hermiticity")
        return HermitianObservable._trusted(float(scalar) * self.matrix)

    __rmul__ = __mul__

    def shifted(self, c: float) -> "HermitianObservable":
        """A + c*I."""
        return HermitianObservable._trusted(self.matrix + float(c) * np.eye(self.dim))

    def apply(self, psi: StateVector) -> np.ndarray:
        _same_dim(self, psi)
        return self.matrix @ psi.amplitudes


def _same_dim(*objs) -> None:
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {sorted(dims)}")


PAULI_X = HermitianObservable(np.array([[0, 1], [1, 0]]))
PAULI_Y = HermitianObservable(np.array([[0, -1j], [1j, 0]]))
PAULI_Z = HermitianObservable(np.array([[1, 0], [0, -1]]))
KET_0 = StateVector.basis(2, 0)
KET_1 = StateVector.basis(2, 1)
KET_PLUS = StateVector.normalized([1, 1])


def expectation(A: HermitianObservable, psi: StateVector) -> float:
    """<psi|A|psi>, after checking that its imaginary part is pure roundoff."""
    raw = np.vdot(psi.amplitudes, A.apply(psi))
    if abs(raw.imag) > IMAG_TOL:
        raise NumericalError(f"<psi|A|psi> has imaginary part {raw.imag:.3e}")
    return float(raw.real)


def variance(A: HermitianObservable, psi: StateVector) -> float:
    """<A^2> - <A>^2, evaluated as ||(A - <A>)|psi>||^2."""
    a_psi = A.apply(psi)
    raw = np.vdot(psi.amplitudes, a_psi)
    if abs(raw.imag) > IMAG_TOL:
        raise NumericalError(f"<psi|A|psi> has imaginary part {raw.imag:.3e}")
    centred = a_psi - raw.real * psi.amplitudes
    var = float(np.vdot(centred, centred).real)
    if var < VARIANCE_FLOOR:
        raise NumericalError(f"negative variance {var:.3e}")
    return max(var, 0.0)


def uncertainty(A: HermitianObservable, psi: StateVector) -> float:
    """Standard deviation Delta A of ``A`` in ``psi``."""
    return float(np.sqrt(variance(A, psi)))


def commutator_expectation(A: HermitianObservable, B: HermitianObservable, psi: StateVector) -> float:
    """Half the modulus of <[A, B]>, the right-hand side of Robertson's relation."""
    _same_dim(A, B, psi)
    a_psi = A.matrix @ psi.amplitudes
    b_psi = B.matrix @ psi.amplitudes
    # <psi|AB - BA|psi> = <A psi|B psi> - <B psi|A psi>
    value = np.vdot(a_psi, b_psi) - np.vdot(b_psi, a_psi)
    return 0.5 * float(abs(value))


_UINT64_MAX = 2**64 - 1


@dataclass
class RandomSource:
    """Seeded sample stream keyed by ``(seed, stream)``.

    Two sources with the same key yield the same sequence of draws, so a
    trial's randomness depends only on its index and never on scheduling.
    """

    seed: int
    stream: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= int(value) <= _UINT64_MAX:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")
        seq = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def complex_normal(self, size) -> np.ndarray:
        """Standard complex Gaussians, E|z|^2 = 1."""
        g = self._gen.standard_normal(size) + 1j * self._gen.standard_normal(size)
        return g / np.sqrt(2.0)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int) -> int:
        """Integer in ``[low, high]`` inclusive."""
        return int(self._gen.integers(low, high, endpoint=True))


def _check_dim(dim: int) -> None:
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")


def sample_haar_state(dim: int, rng: RandomSource) -> StateVector:
    """Haar-random pure state: normalized vector of complex Gaussians."""
    _check_dim(dim)
    return StateVector.normalized(rng.complex_normal(dim))


def sample_hermitian(dim: int, rng: RandomSource) -> HermitianObservable:
    """GUE-style sample (G + G^dagger)/2 with i.i.d. complex Gaussian G."""
    _check_dim(dim)
    g = rng.complex_normal((dim, dim))
    return HermitianObservable._trusted(0.5 * (g + g.conj().T))
