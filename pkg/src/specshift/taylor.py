"""Derivatives of ``x -> f(H + xV)`` and Taylor remainders of matrix functions.

The ``p``-th derivative at ``x = 0`` is the multilinear contraction

    p! * sum Delta^{(p)} f(l_{a_0}, ..., l_{a_p}) P_{a_0} V P_{a_1} ... V P_{a_p}

carried out in the eigenbasis of ``H``.  The remainder

    R_p(f) = f(H_0 + V) - sum_{j<p} (1/j!) d^j/dx^j f(H_0 + xV) |_{x=0}

is then available directly, in closed form for resolvents, through a contour
integral for functions analytic on a disc, and through the integral form
with the weight ``(1 - x)^{p-1}``.
"""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from math import factorial

import numpy as np

from .divdiff import dd_many, dd_resolvent_closed
from .functions import Exponential, Polynomial, ResolventPower, ScalarFunction
from .herm import (
    SpectralDecomposition,
    eigh,
    hermitian,
    matrix_function,
    op_norm,
    resolvent,
)
from .multimeasure import MAX_ENTRIES, SizeError

CONTOUR_POINTS = 256
CONTOUR_MAX_POINTS = 4096
CONTOUR_RTOL = 1e-10


@dataclass(frozen=True)
class RemainderRequest:
    h0: np.ndarray
    v: np.ndarray
    p: int
    f: ScalarFunction

    def __post_init__(self):
        object.__setattr__(self, "h0", hermitian(self.h0))
        object.__setattr__(self, "v", hermitian(self.v))
        if self.p < 1:
            raise ValueError("remainder order must be >= 1")
        if self.h0.shape != self.v.shape:
            raise ValueError("H0 and V must have the same shape")


def _check_poles(f, decomp):
    if isinstance(f, ResolventPower) and np.min(np.abs(f.z - decomp.values)) == 0.0:
        raise ValueError("resolvent pole lies on the spectrum")


def dd_tensor(f: ScalarFunction, decomp: SpectralDecomposition, p: int) -> np.ndarray:
    """``Delta^{(p)} f`` on every ``(p+1)``-tuple of eigen-indices."""
    values = decomp.values
    k = values.size
    if float(decomp.n) ** (p + 1) > MAX_ENTRIES:
        raise SizeError(f"n^{p + 1} exceeds the enumeration budget")
    grid = np.array(list(itertools.product(range(k), repeat=p + 1))) if p else np.arange(k)[:, None]
    vals = dd_many(f, values[grid], cluster_tol=decomp.cluster_tol)
    clustered = vals.reshape((k,) * (p + 1))
    # expand cluster tuples to eigen-index tuples
    lab = decomp.labels
    return clustered[np.ix_(*([lab] * (p + 1)))]


def gateaux_derivative(h, v, p: int, f: ScalarFunction, decomp: SpectralDecomposition | None = None):
    """``d^p/dx^p f(H + xV)`` at ``x = 0``."""
    if p < 0:
        raise ValueError("derivative order must be >= 0")
    v = hermitian(v)
    decomp = decomp if decomp is not None else eigh(h)
    _check_poles(f, decomp)
    u = decomp.eigenvectors
    if p == 0:
        return matrix_function(f, decomp)
    vt = u.conj().T @ v @ u
    dd = dd_tensor(f, decomp, p)
    letters = string.ascii_letters[: p + 1]
    subs = [letters] + [letters[j] + letters[j + 1] for j in range(p)]
    expr = ",".join(subs) + "->" + letters[0] + letters[p]
    core = np.einsum(expr, dd, *([vt] * p), optimize=True)
    return factorial(p) * (u @ core @ u.conj().T)


def taylor_polynomial(h0, v, p: int, f: ScalarFunction, decomp=None):
    """``sum_{j<p} (1/j!) d^j/dx^j f(H_0 + xV)|_0``."""
    decomp = decomp if decomp is not None else eigh(h0)
    out = np.zeros(decomp.eigenvectors.shape, dtype=complex)
    for j in range(p):
        out += gateaux_derivative(h0, v, j, f, decomp) / factorial(j)
    return out


def remainder_direct(req: RemainderRequest, decomp=None, decomp1=None):
    d0 = decomp if decomp is not None else eigh(req.h0)
    d1 = decomp1 if decomp1 is not None else eigh(req.h0 + req.v)
    _check_poles(req.f, d1)
    return matrix_function(req.f, d1) - taylor_polynomial(req.h0, req.v, req.p, req.f, d0)


def remainder_resolvent_closed(h0, v, p: int, z):
    """``(z - H_0 - V)^{-1} (V (z - H_0)^{-1})^p``."""
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("the closed form needs a nonreal z")
    if p < 1:
        raise ValueError("remainder order must be >= 1")
    h0 = hermitian(h0)
    v = hermitian(v)
    r0 = resolvent(h0, z)
    out = resolvent(h0 + v, z)
    for _ in range(p):
        out = out @ v @ r0
    return out


def resolvent_step(h0, v, p: int, z):
    """``((z - H_0)^{-1} V)^p (z - H_0)^{-1}``, the gap ``R_p - R_{p+1}``."""
    r0 = resolvent(hermitian(h0), complex(z))
    v = hermitian(v)
    out = r0
    for _ in range(p):
        out = r0 @ v @ out
    return out


def contour_radius(h0, v) -> float:
    return 1.0 + op_norm(h0) + op_norm(v)


def _contour_sum(req, points, radius):
    theta = 2.0 * np.pi * np.arange(points) / points
    lam = radius * np.exp(1j * theta)
    fl = req.f.analytic(lam)
    n = req.h0.shape[0]
    eye = np.eye(n)
    acc = np.zeros((n, n), dtype=complex)
    for lk, fk in zip(lam, fl):
        r0 = np.linalg.inv(lk * eye - req.h0)
        term = np.linalg.inv(lk * eye - req.h0 - req.v)
        for _ in range(req.p):
            term = term @ req.v @ r0
        acc += fk * lk * term
    return acc / points


def remainder_contour(req: RemainderRequest, quadrature_points: int = CONTOUR_POINTS, adaptive: bool = True):
    """Trapezoidal rule for ``(1/2 pi i) oint f(l) R_p(f_l) dl`` on ``|l| = 1 + |H_0| + |V|``.

    With ``adaptive`` the point count doubles until two successive results
    agree to 1e-10 (relative) or 4096 points are reached.
    """
    radius = contour_radius(req.h0, req.v)
    f = req.f
    if isinstance(f, ResolventPower):
        if abs(f.z) <= radius:
            raise ValueError(f"pole {f.z} lies inside the contour of radius {radius:.3g}")
    elif not isinstance(f, (Polynomial, Exponential)):
        raise ValueError("contour route needs a function analytic on the disc")
    pts = int(quadrature_points)
    cur = _contour_sum(req, pts, radius)
    if not adaptive:
        return cur
    while pts < CONTOUR_MAX_POINTS:
        pts *= 2
        nxt = _contour_sum(req, pts, radius)
        if np.linalg.norm(nxt - cur) <= CONTOUR_RTOL * max(np.linalg.norm(nxt), 1e-300):
            return nxt
        cur = nxt
    return cur


def remainder_integral_form(req: RemainderRequest, nodes: int = 32):
    """``1/(p-1)! int_0^1 (1-x)^{p-1} d^p/dy^p f(H_x + yV)|_0 dx`` (Gauss-Legendre)."""
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    xs = 0.5 * (xs + 1.0)
    ws = 0.5 * ws
    n = req.h0.shape[0]
    acc = np.zeros((n, n), dtype=complex)
    for x, w in zip(xs, ws):
        hx = req.h0 + x * req.v
        acc += w * (1.0 - x) ** (req.p - 1) * gateaux_derivative(hx, req.v, req.p, req.f)
    return acc / factorial(req.p - 1)


def d_identity_check(h0, v, k: int, z) -> dict:
    """Both sides of

        (-1)^k/k! d^k/dz^k tr[R V R V R] = 1/2 tr[d^2/dx^2 (z - H_0 - xV)^{-k-1}],

    with ``R = (z - H_0)^{-1}``.  The left side differentiates the product
    in ``z`` by truncated Taylor arithmetic; the right side goes through the
    divided-difference contraction for ``1/(z - t)^{k+1}``.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("needs a nonreal z")
    if k < 0:
        raise ValueError("k must be >= 0")
    v = hermitian(v)
    D = eigh(h0)
    lam = D.node_values()
    vt = D.eigenvectors.conj().T @ v @ D.eigenvectors
    # tr[R V R V R] = sum_{a,b} Vt_ab Vt_ba / ((z - l_a)^2 (z - l_b))
    a, b = np.meshgrid(np.arange(lam.size), np.arange(lam.size), indexing="ij")
    rows = np.stack([lam[a.ravel()], lam[a.ravel()], lam[b.ravel()]], axis=1)
    coef = (vt * vt.T).ravel()
    lhs = complex(np.sum(coef * dd_resolvent_closed(z, rows, k)))
    rhs = 0.5 * complex(np.trace(gateaux_derivative(h0, v, 2, ResolventPower(z, k + 1), D)))
    return {"lhs": lhs, "rhs": rhs}
