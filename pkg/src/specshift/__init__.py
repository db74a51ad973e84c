"""Higher-order spectral shift functions for Hermitian matrices.

Divided differences, basic splines, multiple spectral measures, Taylor
remainders of matrix functions and the spectral shift densities that turn
their traces into integrals.
"""
from .functions import (
    Exponential,
    Monomial,
    Polynomial,
    ResolventPower,
    ScalarFunction,
    fz,
)
from .herm import (
    SpectralDecomposition,
    eigh,
    matrix_function,
    random_hermitian,
    trace_and_norms,
)

__version__ = "0.1.0"

__all__ = [
    "Exponential",
    "Monomial",
    "Polynomial",
    "ResolventPower",
    "ScalarFunction",
    "SpectralDecomposition",
    "eigh",
    "fz",
    "matrix_function",
    "random_hermitian",
    "trace_and_norms",
]
