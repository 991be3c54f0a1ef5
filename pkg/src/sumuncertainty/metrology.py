"""Phase estimation with the two-branch N-qubit probe.

The probe ``cos(2^(N-1) t)|0...0> - i sin(2^(N-1) t)|1...1>`` is stored as its two
branch amplitudes. Closed-form statistics for three measurement strategies
(product projector, summed projectors, separately measured projectors) and
for M independent probes live here, together with dense-vector oracles that
recompute the same numbers from 2**N (or 2**(MN)) amplitudes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .core import (
    PAULI_X,
    RandomSource,
    ResourceGuardError,
    StateVector,
    uncertainty,
)

MAX_QUBITS = 52
DENSE_QUBIT_LIMIT = 12
SINGULAR_DERIVATIVE = 1e-12


class SingularPointError(ArithmeticError):
    """Spread and slope of the signal both vanish; the precision is 0/0."""


@dataclass(frozen=True)
class TwoBranchState:
    qubits: int
    theta: float

    @property
    def phase(self) -> float:
        return math.ldexp(self.theta, self.qubits - 1)

    @property
    def branch0(self) -> complex:
        return complex(math.cos(self.phase), 0.0)

    @property
    def branch1(self) -> complex:
        return complex(0.0, -math.sin(self.phase))

    @property
    def norm(self) -> float:
        return math.hypot(abs(self.branch0), abs(self.branch1))


@dataclass(frozen=True)
class ProbeEnsemble:
    copies: int
    probe: TwoBranchState

    def __post_init__(self) -> None:
        if self.copies < 1:
            raise ValueError(f"ensemble needs at least one copy, got {self.copies}")


@dataclass(frozen=True)
class MeasurementStats:
    mean: float
    spread: float
    derivative: float
    derivative_numeric: float
    theta: float = float("nan")

    @property
    def derivative_agrees(self) -> bool:
        return abs(self.derivative - self.derivative_numeric) <= max(1e-6, 1e-6 * abs(self.derivative))


@dataclass(frozen=True)
class PrecisionReport:
    delta_theta: float
    mt_lower_bound: Optional[float]
    stats: MeasurementStats
    generator_spread: Optional[float] = None
    # spread * Delta H - |d<X>/dtheta| / 2
    mt_slack: Optional[float] = None


@dataclass(frozen=True)
class ResourceComparison:
    copies: int
    qubits: int
    total_qubits: int
    ensemble: float
    single_block: float
    identity_value: float
    identity_residual: float

    @property
    def lower_than_exponential(self) -> bool:
        if self.copies == 1:
            return self.ensemble == self.single_block
        return self.ensemble > self.single_block


def build_probe_state(qubits: int, theta: float) -> TwoBranchState:
    if not 1 <= qubits <= MAX_QUBITS:
        raise ValueError(f"qubit count must lie in 1..{MAX_QUBITS}, got {qubits}")
    return TwoBranchState(int(qubits), float(theta))


def default_step(qubits: int) -> float:
    """Finite-difference step scaled to the oscillation frequency 2^(N-1)."""
    return math.ldexp(1e-6, 1 - qubits)


def finite_difference_derivative(f: Callable[[float], float], theta: float, step: float) -> float:
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    return (f(theta + step) - f(theta - step)) / (2.0 * step)


def _all_zero_probability(qubits: int) -> Callable[[float], float]:
    return lambda t: abs(build_probe_state(qubits, t).branch0) ** 2


def _stats(probe: TwoBranchState, mult: float, spread_mult: float) -> MeasurementStats:
    n = probe.qubits
    s = math.sin(math.ldexp(probe.theta, n))
    p0 = _all_zero_probability(n)
    numeric = mult * finite_difference_derivative(p0, probe.theta, default_step(n))
    return MeasurementStats(
        mean=mult * math.cos(probe.phase) ** 2,
        spread=spread_mult * 0.5 * abs(s),
        derivative=-mult * math.ldexp(s, n - 1),
        derivative_numeric=numeric,
        theta=probe.theta,
    )


def product_projector_stats(probe: TwoBranchState) -> MeasurementStats:
    """Statistics of X = |0><0| on every qubit, i.e. the projector onto |0...0>."""
    return _stats(probe, 1.0, 1.0)


def sum_projector_stats(probe: TwoBranchState) -> MeasurementStats:
    """Statistics of P_S = sum_i |0><0|_i measured jointly."""
    n = probe.qubits
    return _stats(probe, float(n), float(n))


def individual_projector_stats(probe: TwoBranchState) -> MeasurementStats:
    """Summed means and summed spreads of the N single-site projectors.

    Every P_i has spread |sin(2^N t)|/2 on this state, so the sum equals the
    joint spread of P_S: the sum relation is saturated.
    """
    n = probe.qubits
    return _stats(probe, float(n), float(n))


def ensemble_sum_stats(ensemble: ProbeEnsemble) -> MeasurementStats:
    """Sum over M independent probes of each probe's |0...0> projector."""
    m = ensemble.copies
    return _stats(ensemble.probe, float(m), math.sqrt(m))


def precision(stats: MeasurementStats) -> PrecisionReport:
    """Error-propagation estimate spread / |d<X>/dtheta|."""
    if abs(stats.derivative) <= SINGULAR_DERIVATIVE:
        raise SingularPointError(
            f"d<X>/dtheta = {stats.derivative:.3e} at theta = {stats.theta!r}; precision is indeterminate"
        )
    return PrecisionReport(delta_theta=stats.spread / abs(stats.derivative), mt_lower_bound=None, stats=stats)


def effective_generator_spread(probe: TwoBranchState, copies: int = 1) -> float:
    """Delta H of the generator 2^(N-1) * (flip |0...0> <-> |1...1>), per probe and summed over copies.

    Evaluated in the two-dimensional span of the branches.
    """
    span_state = StateVector([probe.branch0, probe.branch1])
    h_eff = math.ldexp(1.0, probe.qubits - 1) * PAULI_X
    # independent copies: variances add
    return math.sqrt(copies) * uncertainty(h_eff, span_state)


def mandelstam_tamm_bound(probe: TwoBranchState, copies: int = 1) -> float:
    """Lower bound 1 / (2 Delta H) on the achievable delta theta."""
    return 1.0 / (2.0 * effective_generator_spread(probe, copies))


def mt_bound_check(probe: TwoBranchState, stats: MeasurementStats, copies: int = 1) -> PrecisionReport:
    report = precision(stats)
    dh = effective_generator_spread(probe, copies)
    return PrecisionReport(
        delta_theta=report.delta_theta,
        mt_lower_bound=1.0 / (2.0 * dh),
        stats=stats,
        generator_spread=dh,
        mt_slack=stats.spread * dh - 0.5 * abs(stats.derivative),
    )


def resource_normalized_precision(copies: int, qubits: int) -> ResourceComparison:
    """Ensemble precision against one probe with all K = M*N qubits."""
    if copies < 1 or qubits < 1:
        raise ValueError("copies and qubits must be positive")
    k = copies * qubits
    if k > MAX_QUBITS:
        raise ResourceGuardError(f"K = M*N = {k} exceeds the {MAX_QUBITS}-qubit guard")
    ensemble = 1.0 / (math.sqrt(copies) * 2.0**qubits)
    single = 1.0 / 2.0**k
    identity = math.sqrt(qubits) * 2.0 ** (k * (copies - 1) / copies) / (math.sqrt(k) * 2.0**k)
    return ResourceComparison(
        copies=copies,
        qubits=qubits,
        total_qubits=k,
        ensemble=ensemble,
        single_block=single,
        identity_value=identity,
        identity_residual=abs(identity - ensemble) / ensemble,
    )


def singular_distance(qubits: int, theta: float) -> float:
    """Distance from theta to the nearest point with sin(2^N theta) = 0."""
    spacing = math.ldexp(math.pi, -qubits)
    r = math.fmod(theta, spacing)
    r = abs(r)
    return min(r, spacing - r)


def theta_grid(qubits: int, points: int, rng: Optional[RandomSource] = None) -> list[float]:
    """Points across one period (0, pi/2^(N-1)) of the signal, away from singular angles.

    Cells are sampled at their midpoints, or at a seeded position inside the
    central 90% of each cell when ``rng`` is given.
    """
    if points < 1:
        raise ValueError("need at least one theta point")
    period = math.ldexp(math.pi, 1 - qubits)
    exclusion = math.ldexp(1e-6, 1 - qubits)
    grid = []
    for j in range(points):
        u = 0.5 if rng is None else rng.uniform(0.05, 0.95)
        theta = (j + u) * period / points
        if singular_distance(qubits, theta) > exclusion:
            grid.append(theta)
    return grid


# Dense oracles: explicit state vectors evolved under the N-qubit generator
# 2^(N-1) X^{(x)N}, and diagonal projector observables.


def _check_dense(total_qubits: int) -> None:
    if total_qubits > DENSE_QUBIT_LIMIT:
        raise ResourceGuardError(
            f"dense oracle refused: {total_qubits} qubits exceeds the {DENSE_QUBIT_LIMIT}-qubit guard"
        )


@lru_cache(maxsize=None)
def _generator(qubits: int) -> sp.csr_matrix:
    x = sp.csr_matrix(PAULI_X.matrix)
    flip = x
    for _ in range(qubits - 1):
        flip = sp.kron(flip, x, format="csr")
    return math.ldexp(1.0, qubits - 1) * flip


def dense_probe_state(qubits: int, theta: float) -> np.ndarray:
    """exp(-i theta H)|0...0> on all 2**N amplitudes."""
    _check_dense(qubits)
    start = np.zeros(2**qubits, dtype=np.complex128)
    start[0] = 1.0
    return expm_multiply(-1j * theta * _generator(qubits), start)


def _zero_bits(qubits: int) -> np.ndarray:
    """Per basis index (big-endian), a (2**N, N) table of 'qubit i reads 0'."""
    idx = np.arange(2**qubits)
    shifts = np.arange(qubits - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1) == 0


def _diag_moments(diag: np.ndarray, amps: np.ndarray, h_amps: np.ndarray) -> tuple[float, float, float]:
    probs = np.abs(amps) ** 2
    mean = float(probs @ diag)
    spread = math.sqrt(float(probs @ (diag - mean) ** 2))
    # d<X>/dtheta = i<[H, X]> = -2 Im <H psi|X psi>
    derivative = -2.0 * float(np.vdot(h_amps, diag * amps).imag)
    return mean, spread, derivative


def dense_site_spreads(probe: TwoBranchState) -> np.ndarray:
    """Delta P_i for each qubit, from the dense state."""
    amps = dense_probe_state(probe.qubits, probe.theta)
    probs = np.abs(amps) ** 2
    zeros = _zero_bits(probe.qubits).astype(np.float64)
    means = probs @ zeros
    return np.sqrt(probs @ (zeros - means) ** 2)


def dense_projector_stats(probe: TwoBranchState, kind: str) -> MeasurementStats:
    """Dense-vector recomputation of the ``product``, ``sum`` or ``individual`` statistics."""
    n = probe.qubits
    zeros = _zero_bits(n)

    def moments(theta: float) -> list[tuple[float, float, float]]:
        amps = dense_probe_state(n, theta)
        h_amps = math.ldexp(1.0, n - 1) * amps[::-1]
        if kind == "product":
            diags = [zeros.all(axis=1).astype(np.float64)]
        elif kind == "sum":
            diags = [zeros.sum(axis=1).astype(np.float64)]
        elif kind == "individual":
            diags = [zeros[:, i].astype(np.float64) for i in range(n)]
        else:
            raise ValueError(f"unknown measurement kind {kind!r}")
        return [_diag_moments(d, amps, h_amps) for d in diags]

    parts = moments(probe.theta)
    step = default_step(n)

    def mean_at(t: float) -> float:
        return sum(m[0] for m in moments(t))

    return MeasurementStats(
        mean=sum(m[0] for m in parts),
        spread=sum(m[1] for m in parts),
        derivative=sum(m[2] for m in parts),
        derivative_numeric=finite_difference_derivative(mean_at, probe.theta, step),
        theta=probe.theta,
    )


def dense_ensemble_stats(ensemble: ProbeEnsemble) -> MeasurementStats:
    """Dense recomputation of the ensemble statistics on 2**(MN) amplitudes."""
    m, n = ensemble.copies, ensemble.probe.qubits
    _check_dense(m * n)
    block = 2**n
    # per global index: how many blocks sit in |0...0>
    block_digits = (np.arange(block**m)[:, None] // block ** np.arange(m - 1, -1, -1)[None, :]) % block
    diag = (block_digits == 0).sum(axis=1).astype(np.float64)

    def state_and_h(theta: float) -> tuple[np.ndarray, np.ndarray]:
        single = dense_probe_state(n, theta)
        amps = single
        for _ in range(m - 1):
            amps = np.kron(amps, single)
        tensor = amps.reshape((block,) * m)
        # X^{(x)N} on one block reverses that block's index
        h_amps = sum(np.flip(tensor, axis=j) for j in range(m)).reshape(-1)
        return amps, math.ldexp(1.0, n - 1) * h_amps

    amps, h_amps = state_and_h(ensemble.probe.theta)
    mean, spread, derivative = _diag_moments(diag, amps, h_amps)

    def mean_at(t: float) -> float:
        a, _ = state_and_h(t)
        return float(np.abs(a) ** 2 @ diag)

    return MeasurementStats(
        mean=mean,
        spread=spread,
        derivative=derivative,
        derivative_numeric=finite_difference_derivative(mean_at, ensemble.probe.theta, default_step(n)),
        theta=ensemble.probe.theta,
    )
