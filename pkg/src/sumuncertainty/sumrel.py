"""The sum uncertainty relation Delta(A+B) <= Delta A + Delta B and its relatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    INEQUALITY_SLACK,
    DimensionMismatchError,
    HermitianObservable,
    StateVector,
    _same_dim,
    uncertainty,
)

CONVEX_TOL = 1e-12


@dataclass(frozen=True)
class GapReport:
    """``lhs`` is the spread of the combined observable, ``rhs`` the summed spreads."""

    lhs: float
    rhs: float
    gap: float

    @classmethod
    def of(cls, lhs: float, rhs: float) -> "GapReport":
        return cls(lhs=lhs, rhs=rhs, gap=rhs - lhs)

    def holds(self, slack: float = INEQUALITY_SLACK) -> bool:
        return self.gap >= -slack


@dataclass(frozen=True)
class EnergyGapReport(GapReport):
    delta_h: float = 0.0
    delta_t: float = 0.0
    delta_v: float = 0.0


@dataclass(frozen=True)
class ConvexityCheck:
    holds: bool
    margin: float
    lhs: float
    rhs: float


def _is_convex(weights: np.ndarray, strict: bool) -> bool:
    if abs(weights.sum() - 1.0) > CONVEX_TOL:
        return False
    if strict:
        return bool(np.all(weights > 0) and np.all(weights < 1))
    return bool(np.all(weights >= 0))


@dataclass(frozen=True, eq=False)
class WeightedObservableSet:
    """Terms p_i * A_i with strictly positive weights over one Hilbert space."""

    weights: tuple
    observables: tuple

    def __post_init__(self) -> None:
        weights = tuple(float(p) for p in self.weights)
        observables = tuple(self.observables)
        if not observables:
            raise ValueError("a weighted set needs at least one term")
        if len(weights) != len(observables):
            raise ValueError(f"{len(weights)} weights for {len(observables)} observables")
        bad = [p for p in weights if not p > 0]
        if bad:
            raise ValueError(f"weights must be positive, got {bad}")
        _same_dim(*observables)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "observables", observables)

    @property
    def dim(self) -> int:
        return self.observables[0].dim

    @property
    def is_convex(self) -> bool:
        """True when the weights sum to one and each lies strictly inside (0, 1)."""
        return _is_convex(np.asarray(self.weights), strict=True)

    def combined(self) -> HermitianObservable:
        return _combine(self.weights, self.observables)


def _combine(weights: Sequence[float], observables: Sequence[HermitianObservable]) -> HermitianObservable:
    total = np.zeros_like(observables[0].matrix)
    for p, A in zip(weights, observables):
        total = total + p * A.matrix
    return HermitianObservable._trusted(total)


def sum_uncertainty_gap(A: HermitianObservable, B: HermitianObservable, psi: StateVector) -> GapReport:
    _same_dim(A, B, psi)
    return GapReport.of(uncertainty(A + B, psi), uncertainty(A, psi) + uncertainty(B, psi))


def multi_sum_gap(observables: Sequence[HermitianObservable], psi: StateVector) -> GapReport:
    """Delta(sum A_i) against sum Delta A_i for any number of terms."""
    observables = list(observables)
    if not observables:
        raise ValueError("need at least one observable")
    _same_dim(*observables, psi)
    if len(observables) == 1:
        spread = uncertainty(observables[0], psi)
        return GapReport.of(spread, spread)
    total = observables[0]
    for A in observables[1:]:
        total = total + A
    return GapReport.of(uncertainty(total, psi), sum(uncertainty(A, psi) for A in observables))


def weighted_sum_gap(terms: WeightedObservableSet, psi: StateVector) -> GapReport:
    _same_dim(terms, psi)
    lhs = uncertainty(terms.combined(), psi)
    rhs = sum(p * uncertainty(A, psi) for p, A in zip(terms.weights, terms.observables))
    return GapReport.of(lhs, rhs)


def convexity_midpoint_check(
    observables: Sequence[HermitianObservable],
    p: Sequence[float],
    q: Sequence[float],
    psi: StateVector,
    slack: float = INEQUALITY_SLACK,
) -> ConvexityCheck:
    """Midpoint convexity of ``w -> Delta(sum w_i A_i)`` on the probability simplex.

    ``p`` and ``q`` may sit on the boundary of the simplex (zero weights allowed).
    """
    observables = list(observables)
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if not (len(observables) == p.size == q.size) or not observables:
        raise ValueError("weights and observables must have the same nonzero length")
    for name, w in (("p", p), ("q", q)):
        if not _is_convex(w, strict=False):
            raise ValueError(f"{name} is not a convex weight vector: {w.tolist()}")
    _same_dim(*observables, psi)
    mid = uncertainty(_combine(0.5 * (p + q), observables), psi)
    rhs = 0.5 * uncertainty(_combine(p, observables), psi) + 0.5 * uncertainty(_combine(q, observables), psi)
    margin = rhs - mid
    return ConvexityCheck(holds=margin >= -slack, margin=margin, lhs=mid, rhs=rhs)


def convexity_midpoint_check_sets(
    set_a: WeightedObservableSet, set_b: WeightedObservableSet, psi: StateVector
) -> ConvexityCheck:
    """Same check, for two convex ``WeightedObservableSet`` over one observable list."""
    if len(set_a.observables) != len(set_b.observables) or any(
        a is not b and not np.array_equal(a.matrix, b.matrix)
        for a, b in zip(set_a.observables, set_b.observables)
    ):
        raise ValueError("both sets must share the same observable list")
    for s in (set_a, set_b):
        if not s.is_convex:
            raise ValueError(f"weights {s.weights} do not form a convex combination")
    return convexity_midpoint_check(set_a.observables, set_a.weights, set_b.weights, psi)


def state_mixture_uncertainty(
    states: Sequence[StateVector], weights: Sequence[float], A: HermitianObservable
) -> float:
    """sum_i p_i * Delta_i(A), the ignorance averaged over an ensemble of preparations."""
    states = list(states)
    w = np.asarray(weights, dtype=np.float64)
    if len(states) != w.size or not states:
        raise ValueError(f"{w.size} weights for {len(states)} states")
    if not _is_convex(w, strict=False):
        raise ValueError(f"weights must be nonnegative and sum to 1, got {w.tolist()}")
    _same_dim(A, *states)
    return float(sum(p * uncertainty(A, s) for p, s in zip(w, states)))


def equality_witness(A: HermitianObservable, psi: StateVector, c: float, d: float) -> GapReport:
    """Gap for the pair (A, cA + dI), which saturates the sum relation when c > 0."""
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    return sum_uncertainty_gap(A, (c * A).shifted(d), psi)


def kinetic_matrix(grid_size: int, spacing: float) -> HermitianObservable:
    """-(1/2) d^2/dx^2 by three-point differences, Dirichlet ends, unit mass."""
    if grid_size < 1:
        raise ValueError("grid must have at least one point")
    if not spacing > 0:
        raise ValueError(f"grid spacing must be positive, got {spacing}")
    diag = np.full(grid_size, 1.0 / spacing**2)
    off = np.full(grid_size - 1, -0.5 / spacing**2)
    return HermitianObservable._trusted(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))


def kinetic_potential_demo(
    grid_size: int, spacing: float, potential: Sequence[float], psi: StateVector
) -> EnergyGapReport:
    """Delta H against Delta T + Delta V for H = T + V on a uniform grid."""
    potential = np.asarray(potential, dtype=np.float64)
    if potential.shape != (grid_size,) or psi.dim != grid_size:
        raise DimensionMismatchError(
            f"grid size {grid_size}, potential length {potential.size}, state dim {psi.dim}"
        )
    T = kinetic_matrix(grid_size, spacing)
    V = HermitianObservable.diagonal(potential)
    dh = uncertainty(T + V, psi)
    dt = uncertainty(T, psi)
    dv = uncertainty(V, psi)
    return EnergyGapReport(lhs=dh, rhs=dt + dv, gap=dt + dv - dh, delta_h=dh, delta_t=dt, delta_v=dv)
