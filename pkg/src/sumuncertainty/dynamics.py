"""Quantum speed of unitary evolution and the velocity-operator bound."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    INEQUALITY_SLACK,
    HermitianObservable,
    ResourceGuardError,
    StateVector,
    _same_dim,
    expectation,
    uncertainty,
)

EVOLUTION_DIM_LIMIT = 512


@dataclass(frozen=True)
class OverlapDistance:
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"distance {self.value} outside [0, 1]")

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class SpeedReport:
    combined: float
    individual: tuple[float, float]
    slack: float

    def holds(self, slack: float = INEQUALITY_SLACK) -> bool:
        return self.slack >= -slack


@dataclass(frozen=True)
class VelocityBound:
    value: float
    bound: float
    margin: float
    # 2 Delta x Delta(H1+H2): the Robertson step before the sum relation is applied
    robertson_bound: float
    robertson_margin: float
    sum_relation_margin: float


def fubini_study_distance(psi1: StateVector, psi2: StateVector) -> OverlapDistance:
    """sqrt(1 - |<psi1|psi2>|^2).

    Computed as the norm of the part of ``psi2`` orthogonal to ``psi1``, which is
    the same number without the cancellation in ``1 - |overlap|^2``.
    """
    _same_dim(psi1, psi2)
    overlap = np.vdot(psi1.amplitudes, psi2.amplitudes)
    residual = psi2.amplitudes - overlap * psi1.amplitudes
    value = float(np.linalg.norm(residual))
    return OverlapDistance(min(max(value, 0.0), 1.0))


def quantum_speed(H: HermitianObservable, psi: StateVector) -> float:
    """v = Delta H with hbar = 1."""
    return uncertainty(H, psi)


def evolve(H: HermitianObservable, psi: StateVector, t: float) -> StateVector:
    """exp(-i H t)|psi> through the eigendecomposition of H."""
    _same_dim(H, psi)
    if H.dim > EVOLUTION_DIM_LIMIT:
        raise ResourceGuardError(f"dense evolution refused: dim {H.dim} > {EVOLUTION_DIM_LIMIT}")
    energies, vectors = np.linalg.eigh(H.matrix)
    coeffs = vectors.conj().T @ psi.amplitudes
    out = vectors @ (np.exp(-1j * energies * t) * coeffs)
    # unitary up to roundoff; renormalise so the result passes the state check
    return StateVector(out / np.linalg.norm(out))


def numeric_speed(H: HermitianObservable, psi: StateVector, dt: float) -> float:
    """Fubini-Study distance covered in one step ``dt``, divided by ``dt``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return fubini_study_distance(psi, evolve(H, psi, dt)).value / dt


def speed_subadditivity(
    H1: HermitianObservable, H2: HermitianObservable, psi: StateVector, sign: int = 1
) -> SpeedReport:
    """Speed under H1 + sign*H2 against v1 + v2."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    _same_dim(H1, H2, psi)
    combined = quantum_speed(H1 + H2 if sign == 1 else H1 - H2, psi)
    v1, v2 = quantum_speed(H1, psi), quantum_speed(H2, psi)
    return SpeedReport(combined=combined, individual=(v1, v2), slack=v1 + v2 - combined)


def velocity_operator(x: HermitianObservable, H: HermitianObservable) -> HermitianObservable:
    """(1/i)[x, H], the Heisenberg-picture rate of change of ``x``."""
    _same_dim(x, H)
    comm = x.matrix @ H.matrix - H.matrix @ x.matrix
    v = -1j * comm
    # symmetrise away the roundoff asymmetry of the two matrix products
    return HermitianObservable(0.5 * (v + v.conj().T))


def velocity_bound_check(
    x: HermitianObservable, H1: HermitianObservable, H2: HermitianObservable, psi: StateVector
) -> VelocityBound:
    """|<v>| <= 2 Delta x (Delta H1 + Delta H2) for v = (1/i)[x, H1 + H2]."""
    _same_dim(x, H1, H2, psi)
    H = H1 + H2
    value = abs(expectation(velocity_operator(x, H), psi))
    dx = uncertainty(x, psi)
    bound = 2.0 * dx * (uncertainty(H1, psi) + uncertainty(H2, psi))
    robertson = 2.0 * dx * uncertainty(H, psi)
    return VelocityBound(
        value=value,
        bound=bound,
        margin=bound - value,
        robertson_bound=robertson,
        robertson_margin=robertson - value,
        sum_relation_margin=bound - robertson,
    )


def convergence_ratio(H: HermitianObservable, psi: StateVector, dt: float) -> float:
    """|error(dt)| / |error(dt/2)| of :func:`numeric_speed`; about 4 for second order."""
    exact = quantum_speed(H, psi)
    coarse = abs(numeric_speed(H, psi, dt) - exact)
    fine = abs(numeric_speed(H, psi, dt / 2) - exact)
    if fine == 0.0:
        return math.inf if coarse else math.nan
    return coarse / fine
