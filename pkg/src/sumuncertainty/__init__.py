"""Uncertainty functionals for pure states and numerical checks of the sum uncertainty relation."""
from .core import (
    KET_0,
    KET_1,
    KET_PLUS,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionMismatchError,
    HermiticityError,
    HermitianObservable,
    NormalizationError,
    NumericalError,
    RandomSource,
    ResourceGuardError,
    StateVector,
    commutator_expectation,
    expectation,
    sample_haar_state,
    sample_hermitian,
    uncertainty,
)

__version__ = "0.1.0"

__all__ = [
    "KET_0",
    "KET_1",
    "KET_PLUS",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "DimensionMismatchError",
    "HermiticityError",
    "HermitianObservable",
    "NormalizationError",
    "NumericalError",
    "RandomSource",
    "ResourceGuardError",
    "StateVector",
    "commutator_expectation",
    "expectation",
    "sample_haar_state",
    "sample_hermitian",
    "uncertainty",
]
