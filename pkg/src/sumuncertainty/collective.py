"""Collective measurement on N identical copies.

For ``|psi>^N`` and ``A_S = sum_i A_i`` (A on site i, identity elsewhere) the
moments follow from the single-copy ones, so nothing of size d**N is built
except inside :func:`dense_crosscheck`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import (
    DimensionMismatchError,
    HermitianObservable,
    ResourceGuardError,
    StateVector,
    expectation,
    uncertainty,
)

DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class ProductState:
    local: StateVector
    copies: int

    def __post_init__(self) -> None:
        if self.copies < 1:
            raise ValueError(f"need at least one copy, got {self.copies}")


@dataclass(frozen=True, eq=False)
class SiteSumObservable:
    local_term: HermitianObservable
    sites: int

    def __post_init__(self) -> None:
        if self.sites < 1:
            raise ValueError(f"need at least one site, got {self.sites}")


@dataclass(frozen=True)
class DenseCrosscheck:
    dense: float
    structured: float
    residual: float
    second_moment: float
    # N<A^2> + N(N-1)<A>^2, the product-state value of <A_S^2>
    second_moment_expected: float

    @property
    def agrees(self) -> bool:
        return self.residual <= 1e-9 * max(1.0, self.structured)


def _validate(obs: SiteSumObservable, state: ProductState) -> None:
    if obs.local_term.dim != state.local.dim:
        raise DimensionMismatchError(
            f"local observable dim {obs.local_term.dim} != local state dim {state.local.dim}"
        )
    if obs.sites != state.copies:
        raise DimensionMismatchError(f"{obs.sites} sites but {state.copies} copies")


def site_sum_expectation(obs: SiteSumObservable, state: ProductState) -> float:
    _validate(obs, state)
    return obs.sites * expectation(obs.local_term, state.local)


def site_sum_uncertainty(obs: SiteSumObservable, state: ProductState) -> float:
    """Delta A_S = sqrt(N) * Delta A, since the per-site variances add."""
    _validate(obs, state)
    return math.sqrt(obs.sites) * uncertainty(obs.local_term, state.local)


def individual_sum_uncertainty(obs: SiteSumObservable, state: ProductState) -> float:
    """sum_i Delta A_i = N * Delta A for separate measurements on each copy."""
    _validate(obs, state)
    return obs.sites * uncertainty(obs.local_term, state.local)


def _dense_size(d: int, n: int) -> int:
    size = d**n
    if size > DENSE_LIMIT:
        raise ResourceGuardError(f"dense cross-check refused: d**N = {d}**{n} = {size} > {DENSE_LIMIT}")
    return size


def dense_product_state(state: ProductState) -> np.ndarray:
    _dense_size(state.local.dim, state.copies)
    return reduce(np.kron, [state.local.amplitudes] * state.copies)


def apply_site_sum(local: np.ndarray, sites: int, vector: np.ndarray) -> np.ndarray:
    """A_S @ vector on the d**N tensor, one site contraction at a time."""
    d = local.shape[0]
    tensor = vector.reshape((d,) * sites)
    out = np.zeros_like(tensor)
    for site in range(sites):
        out += np.moveaxis(np.tensordot(local, tensor, axes=([1], [site])), 0, site)
    return out.reshape(-1)


def site_sum_matrix(obs: SiteSumObservable) -> HermitianObservable:
    """Explicit d**N x d**N matrix of A_S; only for small systems."""
    d = obs.local_term.dim
    size = _dense_size(d, obs.sites)
    eye = np.eye(d, dtype=np.complex128)
    total = np.zeros((size, size), dtype=np.complex128)
    for site in range(obs.sites):
        factors = [obs.local_term.matrix if k == site else eye for k in range(obs.sites)]
        total += reduce(np.kron, factors)
    return HermitianObservable(total)


def dense_crosscheck(obs: SiteSumObservable, state: ProductState) -> DenseCrosscheck:
    """Recompute Delta A_S from the full d**N state, straight from its definition."""
    _validate(obs, state)
    _dense_size(obs.local_term.dim, obs.sites)
    psi = dense_product_state(state)
    a_psi = apply_site_sum(obs.local_term.matrix, obs.sites, psi)
    mean = float(np.vdot(psi, a_psi).real)
    second = float(np.vdot(a_psi, a_psi).real)  # <A_S^2> = ||A_S psi||^2
    # second - mean**2 loses every digit near eigenstates; take the centred norm instead
    centred = a_psi - mean * psi
    dense = math.sqrt(float(np.vdot(centred, centred).real))
    structured = site_sum_uncertainty(obs, state)

    n = obs.sites
    a1 = expectation(obs.local_term, state.local)
    a2 = float(np.vdot(obs.local_term.apply(state.local), obs.local_term.apply(state.local)).real)
    return DenseCrosscheck(
        dense=dense,
        structured=structured,
        residual=abs(dense - structured),
        second_moment=second,
        second_moment_expected=n * a2 + n * (n - 1) * a1**2,
    )
