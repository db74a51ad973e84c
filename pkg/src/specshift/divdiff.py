"""Divided differences of every order, confluent nodes included.

Nodes closer than a clustering tolerance are treated as coincident; inside a
cluster the recursive quotient is replaced by the Taylor coefficient
``f^{(j)}(x)/j!``.  The core routines are vectorized over many node tuples at
once (rows of an ``(N, p+1)`` array) because the multiple-operator-integral
code evaluates divided differences on every atom of a spectral measure.
"""
from __future__ import annotations

from math import factorial

import numpy as np
from scipy.linalg import expm

from .functions import Exponential, Polynomial, ResolventPower, ScalarFunction

MAX_ESCALATIONS = 2


class PoleError(ValueError):
    """A resolvent pole coincides with a node."""


class DegenerateSplineError(ValueError):
    """All nodes fall into one cluster, so no basic spline exists."""


def default_tol(nodes) -> float:
    x = np.asarray(nodes, dtype=float)
    spread = float(x.max() - x.min()) if x.size else 0.0
    return max(1e-8 * spread, 1e-12)


def _tie_sorted(x: np.ndarray, tol: np.ndarray) -> np.ndarray:
    # chain consecutive sorted nodes within tol onto the cluster's first node,
    # then move every member to the cluster mean
    x = x.copy()
    n_rows, m = x.shape
    start = np.zeros((n_rows, m), dtype=int)
    for j in range(1, m):
        tied = x[:, j] - x[:, j - 1] <= tol
        start[:, j] = np.where(tied, start[:, j - 1], j)
    out = x.copy()
    for j in range(m):
        members = start == start[:, [j]]
        mean = np.sum(np.where(members, x, 0.0), axis=1) / members.sum(axis=1)
        # the rounded mean of equal values can drift by an ulp; keep it in range
        lo = np.min(np.where(members, x, np.inf), axis=1)
        hi = np.max(np.where(members, x, -np.inf), axis=1)
        out[:, j] = np.clip(mean, lo, hi)
    return out


def cluster_rows(nodes, cluster_tol=None) -> np.ndarray:
    """Sort each row and snap clustered nodes to exact ties.

    Nearly coincident but unclustered nodes (gap below ``10 * tol``) make
    the difference quotient lose most of its digits, so the tolerance is
    widened tenfold, at most twice, for the rows where that happens.
    """
    x = np.sort(np.atleast_2d(np.asarray(nodes, dtype=float)), axis=1)
    n_rows, m = x.shape
    if cluster_tol is None:
        spread = x[:, -1] - x[:, 0] if m else np.zeros(n_rows)
        tol = np.maximum(1e-8 * spread, 1e-12)
    else:
        tol = np.full(n_rows, float(cluster_tol))
    if m < 2:
        return x
    for _ in range(MAX_ESCALATIONS):
        gaps = np.diff(x, axis=1)
        risky = np.any((gaps > tol[:, None]) & (gaps < 10.0 * tol[:, None]), axis=1)
        if not risky.any():
            break
        tol = np.where(risky, 10.0 * tol, tol)
    return _tie_sorted(x, tol)


def dd_table(f: ScalarFunction, x: np.ndarray) -> np.ndarray:
    """Top entry of the Newton table for each row of ``x``.

    ``x`` must be row-sorted with exact ties for clustered nodes (see
    :func:`cluster_rows`).
    """
    x = np.atleast_2d(x)
    m = x.shape[1]
    level = [np.asarray(f(x[:, i]), dtype=complex) for i in range(m)]
    for j in range(1, m):
        nxt = []
        for i in range(m - j):
            gap = x[:, i + j] - x[:, i]
            confluent = gap == 0.0
            quotient = (level[i + 1] - level[i]) / np.where(confluent, 1.0, gap)
            if confluent.any():
                quotient = np.where(confluent, f.taylor(x[:, i], j), quotient)
            nxt.append(quotient)
        level = nxt
    return level[0]


def _check_poles(f, x):
    if isinstance(f, ResolventPower) and np.any(np.abs(f.z - x) == 0.0):
        raise PoleError(f"resolvent pole {f.z} coincides with a node")


def dd_polynomial(coeffs, nodes) -> np.ndarray:
    """Divided differences of a polynomial via Horner's scheme on the
    bidiagonal matrix ``J`` with the nodes on its diagonal.

    Only the first row of ``q(J)`` is carried.  There are no divisions, so
    coincident and nearly coincident nodes need no special care, and the
    result for a degree-``m`` polynomial over ``m + 1`` nodes is exactly its
    leading coefficient.
    """
    x = np.atleast_2d(np.asarray(nodes, dtype=float))
    c = np.asarray(coeffs, dtype=complex).ravel()
    row = np.zeros(x.shape, dtype=complex)
    for ck in c[::-1]:
        shifted = np.zeros_like(row)
        shifted[:, 1:] = row[:, :-1]
        row = row * x + shifted
        row[:, 0] += ck
    return row[:, -1]


def dd_exp_opitz(s: float, nodes) -> complex | np.ndarray:
    """Divided differences of ``exp(i s t)`` as the corner entry of
    ``exp(i s J)`` with ``J`` upper bidiagonal (nodes on the diagonal).

    Scaling and squaring keeps this accurate when the value is tiny compared
    with the function values, where the difference quotient cancels.
    """
    arr = np.asarray(nodes, dtype=float)
    x = np.sort(np.atleast_2d(arr), axis=1)
    m = x.shape[1]
    J = np.zeros(x.shape + (m,), dtype=complex)
    idx = np.arange(m)
    J[:, idx, idx] = x
    J[:, idx[:-1], idx[1:]] = 1.0
    val = expm(1j * s * J)[:, 0, m - 1]
    return complex(val[0]) if arr.ndim == 1 else val


def dd_many(f: ScalarFunction, nodes, cluster_tol=None) -> np.ndarray:
    """Divided differences of ``f`` over each row of ``nodes``.

    Polynomials, exponentials and resolvents with nonreal poles are matrix
    functions of the bidiagonal ``J`` and have division-free forms (see
    :func:`dd_polynomial`, :func:`dd_exp_opitz`, :func:`dd_resolvent_closed`).
    Everything else goes through the confluent Newton table on clustered
    nodes, which loses digits when nodes are close but not clustered.
    """
    if isinstance(f, Polynomial):
        return dd_polynomial(f.coeffs, np.atleast_2d(np.asarray(nodes, dtype=float)))
    if isinstance(f, Exponential):
        return dd_exp_opitz(f.s, np.atleast_2d(np.asarray(nodes, dtype=float)))
    if isinstance(f, ResolventPower) and complex(f.z).imag != 0.0:
        return dd_resolvent_closed(f.z, np.atleast_2d(np.asarray(nodes, dtype=float)), f.k - 1)
    x = cluster_rows(nodes, cluster_tol)
    _check_poles(f, x)
    return dd_table(f, x)


def dd_eval(f: ScalarFunction, nodes, cluster_tol=None) -> complex:
    """Divided difference of order ``len(nodes) - 1`` of ``f``.

    >>> from specshift.functions import Monomial
    >>> dd_eval(Monomial(3), [0.0, 1.0, 2.0]).real
    3.0
    """
    nodes = np.asarray(nodes, dtype=float).ravel()
    if nodes.size == 0:
        raise ValueError("need at least one node")
    return complex(dd_many(f, nodes[None, :], cluster_tol)[0])


def _taylor_product(z, x: np.ndarray, order: int) -> np.ndarray:
    # Taylor coefficients in z of prod_j 1/(z - x_j), up to ``order``
    n_rows, m = x.shape
    out = np.zeros((n_rows, order + 1), dtype=complex)
    out[:, 0] = 1.0
    for j in range(m):
        w = z - x[:, j]
        factor = np.stack([(-1.0) ** r / w ** (r + 1) for r in range(order + 1)], axis=1)
        new = np.zeros_like(out)
        for a in range(order + 1):
            new[:, a:] += out[:, [a]] * factor[:, : order + 1 - a]
        out = new
    return out


def dd_resolvent_closed(z, nodes, k: int = 0) -> complex | np.ndarray:
    """Divided difference of ``1/(z - t)^(k+1)`` in product form.

    ``k = 0`` gives ``prod_j 1/(z - x_j)``; larger ``k`` use
    ``(-1)^k/k! d^k/dz^k`` of that product, carried out by truncated
    Taylor arithmetic.  A 2-D ``nodes`` array returns one value per row.
    """
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError("dd_resolvent_closed needs a nonreal z")
    arr = np.asarray(nodes, dtype=float)
    rows = np.atleast_2d(arr)
    coeffs = _taylor_product(z, rows, k)
    val = (-1.0) ** k * coeffs[:, k]
    return complex(val[0]) if arr.ndim == 1 else val


def dd_functional(nodes, cluster_tol=None):
    """Divided difference as a linear functional on derivative values.

    Returns ``(x, C)`` with ``x`` the tied, sorted rows and ``C[:, k, r]``
    such that ``Delta f = sum_{k,r} C[:, k, r] f^{(r)}(x[:, k])``.  Only the
    first column of each cluster carries weight.
    """
    x = cluster_rows(nodes, cluster_tol)
    n_rows, m = x.shape
    first = np.zeros((n_rows, m), dtype=int)
    for i in range(1, m):
        first[:, i] = np.where(x[:, i] == x[:, i - 1], first[:, i - 1], i)
    rows = np.arange(n_rows)
    level = []
    for i in range(m):
        e = np.zeros((n_rows, m, m))
        e[rows, first[:, i], 0] = 1.0
        level.append(e)
    for j in range(1, m):
        nxt = []
        for i in range(m - j):
            gap = x[:, i + j] - x[:, i]
            confluent = gap == 0.0
            q = (level[i + 1] - level[i]) / np.where(confluent, 1.0, gap)[:, None, None]
            if confluent.any():
                c = np.zeros((n_rows, m, m))
                c[rows, first[:, i], j] = 1.0 / factorial(j)
                q = np.where(confluent[:, None, None], c, q)
            nxt.append(q)
        level = nxt
    return x, level[0]


def dd_peano(f: ScalarFunction, nodes, cluster_tol=None) -> complex:
    """``1/(p-1)! * integral f^{(p)}(t) B(t) dt`` against the basic spline ``B``."""
    from .pspline import basic_spline, pair

    nodes = np.asarray(nodes, dtype=float).ravel()
    p = nodes.size - 1
    if p < 1:
        raise ValueError("Peano form needs order p >= 1")
    spline = basic_spline(nodes, cluster_tol)
    return pair(f, p, spline) / factorial(p - 1)

