"""Test-function family with exact derivatives.

Monomials and polynomials, resolvent powers ``1/(z - t)^k`` with nonreal
``z``, and exponentials ``exp(i s t)``.  Every member is vectorized over a
real argument array and knows its derivatives of any order in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as P


def _falling(k: int, j: int) -> float:
    # k (k-1) ... (k-j+1)
    out = 1.0
    for i in range(j):
        out *= k - i
    return out


def _rising(k: int, j: int) -> float:
    # k (k+1) ... (k+j-1)
    out = 1.0
    for i in range(j):
        out *= k + i
    return out


class ScalarFunction:
    """Base class.  Subclasses implement :meth:`derivative`."""

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, j: int):
        raise NotImplementedError

    def analytic(self, w):
        """Value at complex points, for members that extend holomorphically."""
        raise NotImplementedError

    def taylor(self, x, j: int):
        """``f^{(j)}(x) / j!``, the confluent divided-difference entry."""
        return self.derivative(x, j) / factorial(j)

    @property
    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Polynomial(ScalarFunction):
    """``sum_k coeffs[k] t^k`` (ascending coefficients)."""

    coeffs: tuple

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in np.atleast_1d(coeffs)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative_coeffs(self, j: int) -> np.ndarray:
        c = np.array(self.coeffs, dtype=complex)
        if j > len(c) - 1:
            return np.zeros(1, dtype=complex)
        return P.polyder(c, j) if j else c

    def derivative(self, x, j: int):
        x = np.asarray(x, dtype=float)
        return P.polyval(x, self.derivative_coeffs(j)) + 0j

    def analytic(self, w):
        return P.polyval(np.asarray(w, dtype=complex), np.array(self.coeffs))

    @property
    def label(self) -> str:
        return "poly(" + ",".join(f"{c.real:g}" if c.imag == 0 else f"{c:g}" for c in self.coeffs) + ")"


class Monomial(Polynomial):
    """``t^k``."""

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("monomial degree must be non-negative")
        object.__setattr__(self, "coeffs", tuple([0j] * k + [1 + 0j]))

    @property
    def k(self) -> int:
        return self.degree

    def derivative(self, x, j: int):
        x = np.asarray(x, dtype=float)
        k = self.degree
        if j > k:
            return np.zeros_like(x, dtype=complex)
        return _falling(k, j) * x ** (k - j) + 0j

    @property
    def label(self) -> str:
        return f"t^{self.degree}"


@dataclass(frozen=True)
class ResolventPower(ScalarFunction):
    """``1/(z - t)^k`` with ``Im z != 0``."""

    z: complex
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        if self.z.imag == 0.0:
            raise ValueError("ResolventPower needs a nonreal pole z")
        if self.k < 1:
            raise ValueError("ResolventPower exponent must be >= 1")

    def derivative(self, x, j: int):
        x = np.asarray(x, dtype=float)
        # d^j/dt^j (z - t)^{-k} = k (k+1) ... (k+j-1) (z - t)^{-k-j}
        return _rising(self.k, j) / (self.z - x) ** (self.k + j)

    def analytic(self, w):
        return 1.0 / (self.z - np.asarray(w, dtype=complex)) ** self.k

    @property
    def label(self) -> str:
        return f"1/(z-t)^{self.k}@z={self.z:g}"


@dataclass(frozen=True)
class Exponential(ScalarFunction):
    """``exp(i s t)`` at frequency ``s``."""

    s: float

    def derivative(self, x, j: int):
        x = np.asarray(x, dtype=float)
        return (1j * self.s) ** j * np.exp(1j * self.s * x)

    def analytic(self, w):
        return np.exp(1j * self.s * np.asarray(w, dtype=complex))

    @property
    def label(self) -> str:
        return f"exp(i*{self.s:g}*t)"


def fz(z) -> ResolventPower:
    """The resolvent function ``1/(z - t)``."""
    return ResolventPower(z, 1)


def is_entire(f: ScalarFunction) -> bool:
    return isinstance(f, (Polynomial, Exponential))
