"""Spectral shift functions of every order for a Hermitian pair ``(H_0, V)``.

``eta_p`` is the density for which ``tr R_p(f) = int f^{(p)}(t) eta_p(t) dt``.
Order one is the eigenvalue-counting difference; order two has the explicit
Koplienko form; higher orders come either from the recursion that feeds
``eta_{p-1}`` and the transition kernels paired with ``m_{p-1}``, or directly
from basic splines paired with the off-diagonal part of ``m^(2)_p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .functions import Exponential, Monomial, ResolventPower, ScalarFunction, fz
from .herm import eigh, hermitian, hs_norm, matrix_function
from .multimeasure import AtomicMultiMeasure, build_m1, build_m2, build_m_plain
from .pspline import PiecewisePolynomial, kernel_sum, pair
from .report import ReportRow
from .taylor import (
    RemainderRequest,
    gateaux_derivative,
    remainder_contour,
    remainder_direct,
    remainder_resolvent_closed,
    resolvent_step,
)

TAIL_RTOL = 1e-10
IMAG_TOL = 1e-10
WEIGHT_IMAG_RTOL = 1e-12


@dataclass(frozen=True)
class ShiftFunction:
    order: int
    density: PiecewisePolynomial
    provenance: str

    def __call__(self, t):
        return self.density(t).real

    def integral(self) -> float:
        return self.density.integral().real

    def abs_integral(self) -> float:
        return self.density.abs_integral()

    def moment(self, k: int) -> complex:
        return self.density.moment(k)

    def pair(self, f: ScalarFunction, q: int | None = None) -> complex:
        return pair(f, self.order if q is None else q, self.density)

    def minimum(self) -> float:
        return self.density.extrema()[0]

    def support(self):
        return self.density.support()

    def to_dict(self) -> dict:
        return {"order": self.order, "provenance": self.provenance, "density": self.density.to_dict()}


def _pair_inputs(h0, v):
    return hermitian(h0), hermitian(v)


def _scale(v, p):
    return max(hs_norm(v) ** p, 1.0)


def _realify(pp: PiecewisePolynomial, scale: float) -> PiecewisePolynomial:
    if pp.max_imag() > IMAG_TOL * scale:
        raise ArithmeticError(f"density has imaginary part {pp.max_imag():.3e}")
    return pp.real()


def krein_xi(h0, v, d0=None, d1=None) -> ShiftFunction:
    """``xi(t) = #{eig H_0 <= t} - #{eig (H_0 + V) <= t}``."""
    h0, v = _pair_inputs(h0, v)
    a = (d0 or eigh(h0)).eigenvalues
    b = (d1 or eigh(h0 + v)).eigenvalues
    if np.array_equal(a, b):
        return ShiftFunction(1, PiecewisePolynomial.zero(), "counting")
    # #{b > t} - #{a > t}, as truncated powers of exponent zero
    mu = np.concatenate([b, a])
    coef = np.concatenate([np.ones(b.size), -np.ones(a.size)])
    pp = PiecewisePolynomial.from_truncated_powers(mu, np.zeros(mu.size, dtype=int), coef)
    return ShiftFunction(1, pp.compactify(0.5).real(), "counting")


def spline_density(m: AtomicMultiMeasure, tol=None):
    """``(1/(p-1)!) sum_off w Delta^{(p)}[(l - t)_+^{p-1}]`` over the off-diagonal
    atoms of a measure on ``R^{p+1}``, plus the diagonal mass left out.

    For any such measure, ``int f^{(p)} dnu = int Delta^{(p)} f dm`` where
    ``nu`` is this density plus point masses ``w/p!`` at the diagonal atoms.
    """
    p = m.dim - 1
    if p < 1:
        raise ValueError("need a measure on at least two axes")
    diag_mask = m.diagonal_mask(tol)
    off = m.subset(~diag_mask)
    if off.n_atoms == 0:
        pp = PiecewisePolynomial.zero()
    else:
        nodes, weights = _merge_multisets(off.nodes(), off.weights)
        pp = kernel_sum(nodes, weights, p - 1).with_zero_tails().scale(1.0 / factorial(p - 1))
    return pp, m.subset(diag_mask)


def _merge_multisets(nodes, weights, rtol=WEIGHT_IMAG_RTOL):
    """Sum the weights of atoms sharing a node multiset.

    The spline kernel is symmetric in its nodes, so this is exact.  Merging
    lets cancellations between atoms happen on the weights, before the
    divided differences amplify roundoff by up to ``gap^-(p-1)``.  When every
    merged imaginary part sits below ``rtol`` times the largest weight, it is
    dropped.
    """
    keys, inverse = np.unique(np.sort(nodes, axis=1), axis=0, return_inverse=True)
    merged = np.zeros(keys.shape[0], dtype=complex)
    np.add.at(merged, inverse.ravel(), weights)
    floor = rtol * max(np.abs(weights).max(), np.finfo(float).tiny)
    if np.abs(merged.imag).max() <= floor:
        merged = merged.real.astype(complex)
    return keys, merged


def krein_xi_spline(h0, v) -> ShiftFunction:
    """``xi`` from the real measure ``m^(2)_1``: each off-diagonal atom
    contributes ``w * chi_(min, max) / |gap|``."""
    return eta_spline_rep(h0, v, 1)


def koplienko_eta2(h0, v, xi: ShiftFunction | None = None, d0=None) -> ShiftFunction:
    """``eta_2(t) = -int_{-inf}^t xi + tr[E_{H_0}((-inf, t)) V]``."""
    h0, v = _pair_inputs(h0, v)
    d0 = d0 or eigh(h0)
    xi = xi or krein_xi(h0, v, d0)
    cum = xi.density.antiderivative()
    c = np.einsum("kij,ji->k", d0.projectors, v).real
    # sum_{l_i < t} c_i = tr V - sum_i c_i [l_i >= t]
    steps = PiecewisePolynomial.from_truncated_powers(d0.values, np.zeros(c.size, dtype=int), -c)
    steps = steps.add_constant(float(np.sum(c)))
    pp = (steps - cum).compactify(TAIL_RTOL * _scale(v, 2))
    return ShiftFunction(2, pp.real(), "explicit_eta2")


def eta_recursive(h0, v, p: int, d0=None, d1=None) -> ShiftFunction:
    """Recursion from ``eta_{p-1}`` to ``eta_p``:

        eta_p(t) = tr(V^{p-1})/(p-1)! - nu_{p-1}((-inf, t])
                   - 1/(p-1)! sum_{m_{p-1}} w * Delta^{(p-2)}[(l - t)_+^{p-2}]

    with Krein's ``xi`` as the base.
    """
    h0, v = _pair_inputs(h0, v)
    if p < 1:
        raise ValueError("order must be >= 1")
    d0 = d0 or eigh(h0)
    if p == 1:
        return krein_xi(h0, v, d0, d1)
    prev = eta_recursive(h0, v, p - 1, d0, d1)
    m = build_m_plain(h0, v, p - 1, decomp=d0)
    mass = m.total_mass()
    if m.n_atoms:
        kern = kernel_sum(m.nodes(), m.weights, p - 2)
        width = kern.left.size
        # the kernel sum is the constant total mass left of every node
        kern = kern.with_left_tail(np.eye(1, width, 0)[0] * mass)
    else:
        kern = PiecewisePolynomial.zero()
    tr = complex(np.trace(np.linalg.matrix_power(v, p - 1)))
    cum = prev.density.antiderivative()
    pp = (kern.scale(-1.0 / factorial(p - 1)) - cum).add_constant(tr / factorial(p - 1))
    scale = _scale(v, p)
    pp = _realify(pp.compactify(TAIL_RTOL * scale), scale)
    return ShiftFunction(p, pp, "recursive")


def eta_spline_rep(h0, v, p: int, d0=None, d1=None) -> ShiftFunction:
    """``eta_p = 1/(p-1)! sum_{off-diagonal m^(2)_p} w * Delta^{(p)}[(l - t)_+^{p-1}]``."""
    h0, v = _pair_inputs(h0, v)
    if p < 1:
        raise ValueError("order must be >= 1")
    m2 = build_m2(h0, v, p, decomp0=d0, decomp1=d1)
    pp, _ = spline_density(m2)
    scale = _scale(v, p)
    return ShiftFunction(p, _realify(pp, scale), "spline_rep")


def shift_function(h0, v, p: int, route: str = "recursive") -> ShiftFunction:
    if route == "recursive":
        return eta_recursive(h0, v, p)
    if route == "spline":
        return eta_spline_rep(h0, v, p)
    if route == "counting" and p == 1:
        return krein_xi(h0, v)
    if route == "explicit" and p == 2:
        return koplienko_eta2(h0, v)
    raise ValueError(f"unknown route {route!r} for order {p}")


def l1_distance(a: ShiftFunction, b: ShiftFunction) -> float:
    return (a.density - b.density).abs_integral()


# trace formula ---------------------------------------------------------
def default_functions(p: int):
    """Monomials, resolvents at three nonreal points, exponentials at three
    frequencies."""
    return (
        [Monomial(p), Monomial(p + 2), Monomial(p + 4)]
        + [fz(2j), fz(0.5 + 1j), fz(-0.7 - 1.5j)]
        + [Exponential(1.0), Exponential(-2.0), Exponential(3.0)]
    )


def _tolerance(f) -> float:
    return 1e-6 if isinstance(f, Exponential) else 1e-7


def verify_trace_formula(h0, v, p: int, f_set=None, routes=("recursive", "spline"), etas=None,
                         params=None):
    """Compare ``tr R_p(f)`` with ``int f^{(p)} eta_p`` for every ``f`` and route.

    Returns ``(rows, cross)``: one residual row per ``(f, route)`` and one
    row per ``f`` comparing the direct remainder with an independent route
    (the closed resolvent form or the contour integral).  Densities already
    at hand can be passed as ``etas = {route: ShiftFunction}``.
    """
    h0, v = _pair_inputs(h0, v)
    f_set = default_functions(p) if f_set is None else f_set
    params = {"p": p, **(params or {})}
    d0, d1 = eigh(h0), eigh(h0 + v)
    etas = dict(etas or {})
    for r in routes:
        if r not in etas:
            etas[r] = eta_recursive(h0, v, p, d0, d1) if r == "recursive" else eta_spline_rep(h0, v, p, d0, d1)
    rows, cross = [], []
    for f in f_set:
        req = RemainderRequest(h0, v, p, f)
        lhs = complex(np.trace(remainder_direct(req, d0, d1)))
        second = _second_route(req)
        if second is not None:
            cross.append(ReportRow("remainder_routes", f.label, lhs, second[1], 1e-9, {**params, "route": second[0]}))
        for r, eta in etas.items():
            rows.append(ReportRow("trace_formula", f.label, lhs, eta.pair(f), _tolerance(f), {**params, "route": r}))
    return rows, cross


def _second_route(req: RemainderRequest):
    f = req.f
    if isinstance(f, ResolventPower) and f.k == 1:
        return "resolvent_closed", complex(np.trace(remainder_resolvent_closed(req.h0, req.v, req.p, f.z)))
    try:
        return "contour", complex(np.trace(remainder_contour(req)))
    except ValueError:
        return None


# Cauchy transform -----------------------------------------------------
def cauchy_transform(sf: ShiftFunction | PiecewisePolynomial, z, q: int = 0) -> complex:
    """``d^q/dz^q int eta(t)/(z - t) dt = (-1)^q q! int eta(t)/(z - t)^{q+1} dt``."""
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("Cauchy transform needs a nonreal z")
    pp = sf.density if isinstance(sf, ShiftFunction) else sf
    return (-1) ** q * factorial(q) * pair(ResolventPower(z, q + 1), 0, pp)


def cauchy_identity_rows(h0, v, p: int, zs, etas=None):
    """``G^{(p)}_{nu_p}(z) = (-1)^p tr[(z-H_0-V)^{-1}(V(z-H_0)^{-1})^p]`` and the
    three-term relation between orders ``p`` and ``p + 1``."""
    h0, v = _pair_inputs(h0, v)
    etas = etas or {}
    eta_p = etas.get(p) or eta_recursive(h0, v, p)
    eta_q = etas.get(p + 1) or eta_recursive(h0, v, p + 1)
    rows = []
    for z in zs:
        g_p = cauchy_transform(eta_p, z, p)
        closed = (-1) ** p * complex(np.trace(remainder_resolvent_closed(h0, v, p, z)))
        rows.append(ReportRow("cauchy_derivative", f"z={z:g}", g_p, closed, 1e-8, {"p": p}))
        g_q = cauchy_transform(eta_q, z, p + 1)
        step = (-1) ** (p + 1) * complex(np.trace(resolvent_step(h0, v, p, z)))
        rows.append(ReportRow("cauchy_recursion", f"z={z:g}", g_q + g_p, -step, 1e-8, {"p": p}))
    return rows


# third-order integration by parts -------------------------------------
def third_order_parts_identity(h0, v, f_set=None):
    """``tr[f(H_0+V) - f(H_0) - V f'(H_0) - V^2 f''(H_0)/2]`` against
    ``int f''' (-int_{-inf}^t eta_2 + tr[V^2 E_{H_0}((-inf, t))]/2) dt``."""
    h0, v = _pair_inputs(h0, v)
    f_set = f_set or [Monomial(3), Monomial(4), fz(1 + 1j)]
    d0, d1 = eigh(h0), eigh(h0 + v)
    eta2 = koplienko_eta2(h0, v, d0=d0)
    c = np.einsum("kij,ji->k", d0.projectors, v @ v).real
    steps = PiecewisePolynomial.from_truncated_powers(d0.values, np.zeros(c.size, dtype=int), -0.5 * c)
    steps = steps.add_constant(0.5 * float(np.sum(c)))
    kernel = (steps - eta2.density.antiderivative()).compactify(TAIL_RTOL * _scale(v, 2))
    rows = []
    for f in f_set:
        f1 = np.einsum("k,kij->ij", f.derivative(d0.values, 1), d0.projectors)
        f2 = np.einsum("k,kij->ij", f.derivative(d0.values, 2), d0.projectors)
        lhs = np.trace(matrix_function(f, d1) - matrix_function(f, d0) - v @ f1 - 0.5 * v @ v @ f2)
        rows.append(ReportRow("third_order_parts", f.label, complex(lhs), pair(f, 3, kernel), 1e-8))
    return rows


# spectral averaging -----------------------------------------------------
def _gauss01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def spectral_average_first(h0, v, f_set=None, quad_nodes: int = 64):
    """``int_0^1 tr[f'(H_x) V] dx = int f' xi`` and its cluster form
    ``int_0^1 sum_c f'(l_c(x)) tr[P_c(x) V] dx``."""
    if quad_nodes < 16:
        raise ValueError("need at least 16 quadrature nodes")
    h0, v = _pair_inputs(h0, v)
    f_set = f_set or [Monomial(3), fz(0.5 + 1j), Exponential(1.0)]
    xi = krein_xi(h0, v)
    xs, ws = _gauss01(quad_nodes)
    decomps = [eigh(h0 + x * v) for x in xs]
    rows = []
    for f in f_set:
        lhs = 0j
        lhs_c = 0j
        for D, w in zip(decomps, ws):
            fp = np.einsum("k,kij->ij", f.derivative(D.values, 1), D.projectors)
            lhs += w * np.trace(fp @ v)
            weights = np.einsum("kij,ji->k", D.projectors, v)
            lhs_c += w * np.sum(f.derivative(D.values, 1) * weights)
        rhs = xi.pair(f, 1)
        rows.append(ReportRow("spectral_average_1", f.label, complex(lhs), rhs, 1e-9))
        rows.append(ReportRow("spectral_average_1_clusters", f.label, complex(lhs_c), rhs, 1e-9))
    return rows


def spectral_average_higher(h0, v, p: int, f_set=None, quad_nodes: int = 64, eta=None):
    """Weak form of the higher-order averaging identity:

        1/(p-1)! int_0^1 (1-x)^{p-1} sum_c f^{(p)}(l_c(x)) tr[(P_c(x) V)^p] dx
          = int f^{(p)} eta_p
            - p/(p-1)! int_0^1 (1-x)^{p-1} sum_{off-diag m^(1)_{p,H_x,V}} w int f^{(p)} B dx

    where ``B`` is the basic spline over the atom's nodes.
    """
    if p < 2:
        raise ValueError("higher-order averaging needs p >= 2")
    if quad_nodes < 32:
        raise ValueError("need at least 32 quadrature nodes")
    h0, v = _pair_inputs(h0, v)
    f_set = f_set or [Monomial(p + 2), fz(0.5 + 1j), Exponential(1.0)]
    eta = eta or eta_recursive(h0, v, p)
    xs, ws = _gauss01(quad_nodes)
    diag_terms, splines = [], []
    for x in xs:
        D = eigh(h0 + x * v)
        pv = np.einsum("kij,jl->kil", D.projectors, v)
        diag_terms.append((D.values, np.array([np.trace(np.linalg.matrix_power(a, p)) for a in pv])))
        m1 = build_m1(h0 + x * v, v, p, decomp=D)
        same = np.all(m1.index == m1.index[:, :1], axis=1)
        off = m1.subset(~same)
        if off.n_atoms:
            splines.append(kernel_sum(off.nodes(), off.weights, p - 1).with_zero_tails())
        else:
            splines.append(PiecewisePolynomial.zero())
    c = 1.0 / factorial(p - 1)
    rows = []
    for f in f_set:
        lhs = c * sum(
            w * (1 - x) ** (p - 1) * np.sum(f.derivative(vals, p) * tr) for (vals, tr), x, w in zip(diag_terms, xs, ws)
        )
        corr = p * c * sum(w * (1 - x) ** (p - 1) * pair(f, p, s) for s, x, w in zip(splines, xs, ws))
        rhs = eta.pair(f) - corr
        rows.append(ReportRow("spectral_average_p", f.label, complex(lhs), complex(rhs), 1e-6, {"p": p}))
    return rows


def gateaux_trace_check(h0, v, p: int, f):
    """``tr d^p/dx^p f(H_0 + xV)|_0 = p! int Delta^{(p)} f dm^(1)_p``."""
    lhs = complex(np.trace(gateaux_derivative(h0, v, p, f)))
    rhs = factorial(p) * build_m1(h0, v, p).pair_divided_difference(f)
    return ReportRow("gateaux_trace", f.label, lhs, rhs, 1e-9, {"p": p})
