"""Piecewise polynomials with exact integration, basic splines and the
transition kernels ``t -> Delta^(m)[(lambda - t)_+^m]``.

A :class:`PiecewisePolynomial` stores one coefficient row per interval
``[b_k, b_{k+1})`` in the local power basis ``s = t - b_k``, plus a left tail
(local about ``b_0``) and a right tail (local about ``b_K``).  Jumps at
breakpoints are allowed; point values are right-continuous.
"""
from __future__ import annotations

import json
from math import comb, factorial

import numpy as np
from numpy.polynomial import polynomial as P

from .divdiff import DegenerateSplineError, cluster_rows, dd_functional
from .functions import Polynomial, ResolventPower, ScalarFunction

MERGE_TOL = 1e-12
GAUSS_NODES = 20


class ImproperIntegralError(ValueError):
    """Antiderivative from minus infinity of something with a nonzero left tail."""


def _pad(c, width):
    c = np.asarray(c, dtype=complex)
    out = np.zeros(c.shape[:-1] + (width,), dtype=complex)
    out[..., : c.shape[-1]] = c
    return out


def taylor_shift(c, delta):
    """Coefficients of ``q(s + delta)`` given those of ``q(s)`` (last axis)."""
    c = np.asarray(c, dtype=complex)
    d = c.shape[-1]
    delta = np.asarray(delta, dtype=complex)
    out = np.zeros_like(c, dtype=complex)
    for i in range(d):
        for j in range(i + 1):
            out[..., j] += c[..., i] * comb(i, j) * delta ** (i - j)
    return out


def merge_breakpoints(*arrays, tol=MERGE_TOL):
    b = np.sort(np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays]))
    if b.size == 0:
        return b
    keep = np.concatenate([[True], np.diff(b) > tol])
    return b[keep]


class PiecewisePolynomial:
    def __init__(self, breakpoints, pieces, left=None, right=None):
        b = np.asarray(breakpoints, dtype=float).ravel()
        if b.size == 0:
            b = np.zeros(1)
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must be strictly ascending")
        pieces = np.asarray(pieces, dtype=complex)
        if pieces.ndim == 1:
            pieces = pieces.reshape(len(b) - 1, -1) if len(b) > 1 else pieces.reshape(0, max(pieces.size, 1))
        width = max(
            pieces.shape[1] if pieces.size else 1,
            len(np.atleast_1d(left)) if left is not None else 1,
            len(np.atleast_1d(right)) if right is not None else 1,
        )
        if pieces.shape[0] != len(b) - 1:
            raise ValueError(f"{len(b)} breakpoints need {len(b) - 1} pieces, got {pieces.shape[0]}")
        self.breakpoints = b
        self.pieces = _pad(pieces.reshape(len(b) - 1, -1) if pieces.size else np.zeros((len(b) - 1, 1)), width)
        self.left = _pad(np.atleast_1d(left if left is not None else 0.0), width)
        self.right = _pad(np.atleast_1d(right if right is not None else 0.0), width)

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls([0.0], np.zeros((0, 1)))

    @classmethod
    def indicator(cls, a, b, value=1.0):
        """``value`` on ``[a, b)``, zero elsewhere."""
        return cls([a, b], [[value]])

    @classmethod
    def from_truncated_powers(cls, mu, exponents, coefs, tol=MERGE_TOL):
        """``sum_i coefs[i] * (mu[i] - t)_+^{exponents[i]}`` with ``x_+^0 = [x >= 0]``.

        The left tail is evaluated honestly (it is the full polynomial sum);
        the right tail is identically zero.
        """
        mu = np.asarray(mu, dtype=float).ravel()
        d = np.asarray(exponents, dtype=int).ravel()
        c = np.asarray(coefs, dtype=complex).ravel()
        if mu.size == 0:
            return cls.zero()
        order = np.argsort(mu, kind="stable")
        mu, d, c = mu[order], d[order], c[order]
        grp = np.concatenate([[0], np.cumsum(np.diff(mu) > tol)])
        b = mu[np.concatenate([[True], np.diff(grp) > 0])]
        mu = b[grp]
        width = int(d.max()) + 1
        # on [b_k, b_{k+1}) the active terms are those with mu >= b_{k+1};
        # expand (mu - b_k - s)^d in the local variable s.  Row n_b - 1 of
        # ``active`` is replaced by "all terms" and becomes the left tail.
        n_b = b.size
        anchor = np.concatenate([b[:-1], b[:1]])
        h = mu[None, :] - anchor[:, None]
        active = grp[None, :] > np.arange(n_b)[:, None]
        active[-1] = True
        rows = np.zeros((n_b, width), dtype=complex)
        for dd in np.unique(d):
            sel = d == dd
            cs = np.where(active[:, sel], c[sel][None, :], 0.0)
            for j in range(dd + 1):
                rows[:, j] += comb(dd, j) * (-1.0) ** j * np.sum(cs * h[:, sel] ** (dd - j), axis=1)
        pieces, left = rows[:-1], rows[-1]
        return cls(b, pieces, left, np.zeros(width))

    # evaluation ---------------------------------------------------------
    @property
    def degree(self) -> int:
        return self.pieces.shape[1] - 1

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        b = self.breakpoints
        idx = np.searchsorted(b, t, side="right") - 1
        out = np.empty(t.shape, dtype=complex)
        lo = idx < 0
        hi = idx >= len(b) - 1
        mid = ~lo & ~hi
        out[lo] = P.polyval(t[lo] - b[0], self.left)
        out[hi] = P.polyval(t[hi] - b[-1], self.right)
        if mid.any():
            k = idx[mid]
            s = t[mid] - b[k]
            coeffs = self.pieces[k]
            acc = np.zeros(s.shape, dtype=complex)
            for j in range(coeffs.shape[1] - 1, -1, -1):
                acc = acc * s + coeffs[:, j]
            out[mid] = acc
        return out[0] if scalar else out

    # algebra ------------------------------------------------------------
    def refine(self, breakpoints):
        """Re-express on a breakpoint set containing the current one."""
        nb = np.asarray(breakpoints, dtype=float)
        old = self.breakpoints
        width = self.pieces.shape[1]
        pieces = np.zeros((len(nb) - 1, width), dtype=complex)
        for k in range(len(nb) - 1):
            mid = 0.5 * (nb[k] + nb[k + 1])
            j = np.searchsorted(old, mid, side="right") - 1
            if j < 0:
                pieces[k] = taylor_shift(self.left, nb[k] - old[0])
            elif j >= len(old) - 1:
                pieces[k] = taylor_shift(self.right, nb[k] - old[-1])
            else:
                pieces[k] = taylor_shift(self.pieces[j], nb[k] - old[j])
        left = taylor_shift(self.left, nb[0] - old[0])
        right = taylor_shift(self.right, nb[-1] - old[-1])
        return PiecewisePolynomial(nb, pieces, left, right)

    def __add__(self, other):
        if not isinstance(other, PiecewisePolynomial):
            return NotImplemented
        b = merge_breakpoints(self.breakpoints, other.breakpoints)
        a1, a2 = self.refine(b), other.refine(b)
        w = max(a1.pieces.shape[1], a2.pieces.shape[1])
        return PiecewisePolynomial(
            b,
            _pad(a1.pieces, w) + _pad(a2.pieces, w),
            _pad(a1.left, w) + _pad(a2.left, w),
            _pad(a1.right, w) + _pad(a2.right, w),
        )

    def scale(self, c):
        return PiecewisePolynomial(self.breakpoints, c * self.pieces, c * self.left, c * self.right)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return self + (-other)

    def add_constant(self, c):
        pieces = self.pieces.copy()
        pieces[:, 0] += c
        left, right = self.left.copy(), self.right.copy()
        left[0] += c
        right[0] += c
        return PiecewisePolynomial(self.breakpoints, pieces, left, right)

    def derivative(self):
        def der(c):
            return _pad(P.polyder(c), c.shape[-1]) if c.shape[-1] > 1 else np.zeros_like(c)

        pieces = np.array([der(c) for c in self.pieces]).reshape(self.pieces.shape)
        return PiecewisePolynomial(self.breakpoints, pieces, der(self.left), der(self.right))

    def tail_norm(self) -> float:
        return float(max(np.max(np.abs(self.left)), np.max(np.abs(self.right))))

    def is_compact(self, tol=0.0) -> bool:
        return self.tail_norm() <= tol

    def with_zero_tails(self):
        return PiecewisePolynomial(self.breakpoints, self.pieces, None, None)

    def compactify(self, tol: float):
        """Drop tails that cancel to roundoff; refuse if they exceed ``tol``."""
        if self.tail_norm() > tol:
            raise ValueError(f"tails of size {self.tail_norm():.3e} do not cancel (tol {tol:.1e})")
        return self.with_zero_tails()

    def with_left_tail(self, coeffs):
        return PiecewisePolynomial(self.breakpoints, self.pieces, coeffs, self.right)

    def antiderivative(self, from_min: bool = False):
        """``F(t) = integral_{-inf}^t`` (or from ``b_0`` when ``from_min``)."""
        if not from_min and np.any(self.left != 0):
            raise ImproperIntegralError("nonzero left tail: integral from -inf diverges")
        b = self.breakpoints
        w = self.pieces.shape[1] + 1
        pieces = np.zeros((len(b) - 1, w), dtype=complex)
        acc = 0.0 + 0j
        for k in range(len(b) - 1):
            integ = P.polyint(self.pieces[k])
            pieces[k] = _pad(integ, w)
            pieces[k, 0] += acc
            acc = P.polyval(b[k + 1] - b[k], pieces[k])
        right = _pad(P.polyint(self.right), w)
        right[0] += acc
        left = _pad(P.polyint(self.left), w) if from_min else np.zeros(w)
        return PiecewisePolynomial(b, pieces, left, right)

    def piece_integrals(self) -> np.ndarray:
        h = np.diff(self.breakpoints)
        j = np.arange(self.pieces.shape[1])
        return np.sum(self.pieces * h[:, None] ** (j + 1) / (j + 1), axis=1)

    def integral(self) -> complex:
        if not self.is_compact():
            raise ImproperIntegralError("integral over the line needs zero tails")
        return complex(np.sum(self.piece_integrals()))

    def moment(self, k: int) -> complex:
        from .functions import Monomial

        return pair(Monomial(k), 0, self)

    def abs_integral(self) -> float:
        """``integral |Re pp|`` by isolating the real roots of every piece."""
        if not self.is_compact():
            raise ImproperIntegralError("abs integral over the line needs zero tails")
        total = 0.0
        h = np.diff(self.breakpoints)
        for c, hk in zip(self.pieces.real, h):
            c = np.trim_zeros(c, "b")
            if c.size == 0:
                continue
            cuts = [0.0, hk]
            if c.size > 1:
                r = np.roots(c[::-1])
                r = r[np.abs(r.imag) <= 1e-12 * max(1.0, hk)].real
                cuts += [x for x in r if 0.0 < x < hk]
            cuts = np.sort(cuts)
            anti = P.polyint(c)
            vals = P.polyval(cuts, anti)
            total += float(np.sum(np.abs(np.diff(vals))))
        return total

    def extrema(self) -> tuple[float, float]:
        """Min and max of the real part over the line (tails included)."""
        cand = []
        b = self.breakpoints
        for tail in (self.left, self.right):
            t = np.trim_zeros(tail.real, "b")
            if t.size > 1:
                lead = t[-1]
                # nonconstant tail: unbounded
                return (-np.inf, np.inf) if lead else (0.0, 0.0)
            cand.append(t[0] if t.size else 0.0)
        for c, bk, hk in zip(self.pieces.real, b[:-1], np.diff(b)):
            pts = [0.0, hk]
            dc = P.polyder(c) if c.size > 1 else np.zeros(1)
            dc = np.trim_zeros(dc, "b")
            if dc.size > 1:
                r = np.roots(dc[::-1])
                r = r[np.abs(r.imag) <= 1e-12].real
                pts += [x for x in r if 0.0 < x < hk]
            cand.extend(P.polyval(np.array(pts), c))
        cand = np.asarray(cand, dtype=float)
        return float(cand.min()), float(cand.max())

    def max_imag(self) -> float:
        """Upper bound for ``sup |Im pp|`` over the breakpoint range:
        ``sum_j |Im c_j| h^j`` on each piece, plus the tail coefficients."""
        h = np.diff(self.breakpoints)
        j = np.arange(self.pieces.shape[1])
        per_piece = np.sum(np.abs(self.pieces.imag) * h[:, None] ** j, axis=1) if h.size else np.zeros(1)
        tails = max(np.max(np.abs(self.left.imag)), np.max(np.abs(self.right.imag)))
        return float(max(np.max(per_piece, initial=0.0), tails))

    def real(self):
        return PiecewisePolynomial(self.breakpoints, self.pieces.real, self.left.real, self.right.real)

    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def sample(self, num: int = 400, pad: float = 0.05):
        a, b = self.support()
        w = (b - a) or 1.0
        t = np.linspace(a - pad * w, b + pad * w, num)
        return t, self(t)

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        def enc(c):
            c = np.asarray(c)
            if np.all(c.imag == 0):
                return c.real.tolist()
            return [[float(v.real), float(v.imag)] for v in np.ravel(c)] if c.ndim == 1 else [enc(r) for r in c]

        return {
            "breakpoints": self.breakpoints.tolist(),
            "pieces": [enc(c) for c in self.pieces],
            "left_tail": enc(self.left),
            "right_tail": enc(self.right),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        def dec(c):
            c = list(c)
            if c and isinstance(c[0], (list, tuple)):
                return np.array([complex(re, im) for re, im in c])
            return np.array(c, dtype=complex)

        pieces = [dec(c) for c in d["pieces"]]
        width = max([len(c) for c in pieces] + [len(d["left_tail"]), len(d["right_tail"]), 1])
        arr = np.array([_pad(c, width) for c in pieces]) if pieces else np.zeros((0, width))
        return cls(d["breakpoints"], arr, dec(d["left_tail"]), dec(d["right_tail"]))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"PiecewisePolynomial(breakpoints={len(self.breakpoints)}, degree={self.degree})"


def kernel_sum(nodes, weights, exponent: int, cluster_tol=None) -> PiecewisePolynomial:
    """``sum_a weights[a] * Delta^{(m)}_{nodes[a]}[(lambda - t)_+^exponent]``.

    Each row of ``nodes`` holds ``m + 1`` nodes.  The divided difference is
    expanded as a combination of truncated powers ``(x_k - t)_+^{e-r}`` via
    :func:`~specshift.divdiff.dd_functional`, and all rows are accumulated
    before a single piecewise polynomial is assembled.
    """
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    weights = np.asarray(weights, dtype=complex).ravel()
    if nodes.shape[0] == 0:
        return PiecewisePolynomial.zero()
    if exponent == nodes.shape[1] - 2 and exponent >= 0:
        return _bspline_sum(cluster_rows(nodes, cluster_tol), weights)
    x, C = dd_functional(nodes, cluster_tol)
    m = x.shape[1]
    mus, exps, coefs = [], [], []
    for r in range(min(m, exponent + 1)):
        fac = factorial(exponent) / factorial(exponent - r)
        for k in range(m):
            c = C[:, k, r]
            nz = c != 0.0
            if nz.any():
                mus.append(x[nz, k])
                exps.append(np.full(nz.sum(), exponent - r))
                coefs.append(weights[nz] * c[nz] * fac)
    if np.any(np.abs(C[:, :, exponent + 1 :]) > 0) if m > exponent + 1 else False:
        raise DegenerateSplineError("derivative order exceeds the truncated power's smoothness")
    if not mus:
        return PiecewisePolynomial.zero()
    return PiecewisePolynomial.from_truncated_powers(
        np.concatenate(mus), np.concatenate(exps), np.concatenate(coefs)
    )


def _bspline_sum(x, weights, chunk=2048) -> PiecewisePolynomial:
    """Weighted sum of ``Delta^{(m)}[(lambda - t)_+^{m-1}] = N(t) / (x_m - x_0)``.

    ``x`` is row-sorted with exact ties.  ``N`` is the normalized B-spline on
    the knots of a row, built by the de Boor-Cox recursion directly on local
    coefficients in the scaled variable ``s = (t - b_g) / h_g`` of every
    global piece.  Each step is a convex blend, so close but distinct nodes
    cost no accuracy, unlike the expansion into truncated powers.
    """
    R, m1 = x.shape
    deg = m1 - 2
    span = x[:, -1] - x[:, 0]
    if np.any(span <= 0):
        raise DegenerateSplineError("all nodes of a row coincide; the basic spline is undefined")
    b = np.unique(x)
    lo, h = b[:-1], np.diff(b)
    G = lo.size
    pieces = np.zeros((G, deg + 1), dtype=complex)
    for start in range(0, R, chunk):
        xs = x[start : start + chunk]
        w = weights[start : start + chunk] / span[start : start + chunk]
        # degree zero: the piece lies inside [x_i, x_{i+1})
        inside = (xs[:, :-1, None] <= lo) & (b[1:] <= xs[:, 1:, None])
        N = np.zeros(inside.shape + (deg + 1,))
        N[..., 0] = inside
        for k in range(1, deg + 1):
            left = xs[:, : m1 - k - 1]
            d1 = xs[:, k : m1 - 1] - xs[:, : m1 - k - 1]
            d2 = xs[:, k + 1 :] - xs[:, 1 : m1 - k]
            r1 = np.divide(1.0, d1, out=np.zeros_like(d1), where=d1 > 0)[..., None]
            r2 = np.divide(1.0, d2, out=np.zeros_like(d2), where=d2 > 0)[..., None]
            # (t - x_i) / d1 = a1 + c1 * s and (x_{i+k+1} - t) / d2 = a2 - c2 * s
            a1 = (lo - left[..., None]) * r1
            a2 = (xs[:, k + 1 :, None] - lo) * r2
            c1, c2 = h * r1, h * r2
            A, B = N[:, :-1], N[:, 1:]
            new = a1[..., None] * A + a2[..., None] * B
            new[..., 1:] += c1[..., None] * A[..., :-1] - c2[..., None] * B[..., :-1]
            N = new
        pieces += np.einsum("r,rgj->gj", w, N[:, 0])
    pieces /= h[:, None] ** np.arange(deg + 1)
    return PiecewisePolynomial(b, pieces)


def _n_clusters(row_sorted_tied):
    return 1 + np.sum(np.diff(row_sorted_tied, axis=1) != 0, axis=1)


def basic_spline(nodes, cluster_tol=None) -> PiecewisePolynomial:
    """``t -> Delta^{(p)}[(lambda - t)_+^{p-1}]`` over ``p + 1`` nodes.

    Non-negative, supported in ``[min, max]`` of the nodes, integral ``1/p``.
    The left tail vanishes identically and is stored as exact zeros.
    """
    nodes = np.asarray(nodes, dtype=float).ravel()
    p = nodes.size - 1
    if p < 1:
        raise ValueError("basic spline needs order p >= 1")
    x = cluster_rows(nodes[None, :], cluster_tol)
    if _n_clusters(x)[0] < 2:
        raise DegenerateSplineError("all nodes coincide; the basic spline is undefined")
    return kernel_sum(x, [1.0], p - 1, cluster_tol=0.0).with_zero_tails()


def transition_kernel(nodes, cluster_tol=None) -> PiecewisePolynomial:
    """``t -> Delta^{(m)}[(lambda - t)_+^m]`` over ``m + 1`` nodes.

    Equals 1 left of the smallest node and 0 right of the largest; the left
    tail is stored as the exact constant 1.
    """
    nodes = np.asarray(nodes, dtype=float).ravel()
    m = nodes.size - 1
    if m < 0:
        raise ValueError("need at least one node")
    pp = kernel_sum(nodes[None, :], [1.0], m, cluster_tol)
    left = np.zeros_like(pp.left)
    left[0] = 1.0
    return PiecewisePolynomial(pp.breakpoints, pp.pieces, left, pp.right)


# pairing ---------------------------------------------------------------
def _gauss(n=GAUSS_NODES):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _pair_polynomial(coeffs, pp):
    # exact: shift the global polynomial to each local basis and integrate
    b = pp.breakpoints
    h = np.diff(b)
    total = 0j
    for c, bk, hk in zip(pp.pieces, b[:-1], h):
        g = taylor_shift(coeffs, bk)
        prod = P.polymul(g, c)
        total += P.polyval(hk, P.polyint(prod))
    return total


def _resolvent_piece(c, w0, h, m):
    # integral_0^h c(s) / (w0 - s)^m ds, substituting w = w0 - s
    deg = len(c) - 1
    d = np.zeros(deg + 1, dtype=complex)
    for j, cj in enumerate(c):
        if cj == 0:
            continue
        for i in range(j + 1):
            d[i] += cj * comb(j, i) * w0 ** (j - i) * (-1.0) ** i
    w1 = w0 - h
    total = 0j
    for i, di in enumerate(d):
        if di == 0:
            continue
        e = i - m
        if e == -1:
            total += di * (np.log(w0) - np.log(w1))
        else:
            total += di * (w0 ** (e + 1) - w1 ** (e + 1)) / (e + 1)
    return total


def _resolvent_tail(c, w0, m, side):
    # right tail: integral_0^inf c(s)/(w0 - s)^m ds; left: integral_{-inf}^0
    deg = len(np.trim_zeros(c, "b")) - 1
    if deg < 0:
        return 0j
    if deg - m + 1 >= 0:
        raise ImproperIntegralError("tail does not decay fast enough against the resolvent")
    d = np.zeros(deg + 1, dtype=complex)
    for j in range(deg + 1):
        for i in range(j + 1):
            d[i] += c[j] * comb(j, i) * w0 ** (j - i) * (-1.0) ** i
    val = sum(di * w0 ** (i - m + 1) / (i - m + 1) for i, di in enumerate(d))
    return val if side == "right" else -val


def pair(f: ScalarFunction, q: int, pp: PiecewisePolynomial) -> complex:
    """``integral f^{(q)}(t) pp(t) dt``.

    Exact for polynomials and resolvent powers (principal-branch logs),
    20-point Gauss-Legendre per piece otherwise.
    """
    if q < 0:
        raise ValueError("derivative order must be non-negative")
    if isinstance(f, Polynomial):
        if not pp.is_compact():
            raise ImproperIntegralError("polynomial pairing needs compact support")
        return complex(_pair_polynomial(f.derivative_coeffs(q), pp))
    if isinstance(f, ResolventPower):
        m = f.k + q
        scale = np.prod([f.k + i for i in range(q)]) if q else 1.0
        b = pp.breakpoints
        total = 0j
        for c, bk, hk in zip(pp.pieces, b[:-1], np.diff(b)):
            total += _resolvent_piece(c, f.z - bk, hk, m)
        if np.any(pp.right != 0):
            total += _resolvent_tail(pp.right, f.z - b[-1], m, "right")
        if np.any(pp.left != 0):
            total += _resolvent_tail(pp.left, f.z - b[0], m, "left")
        return complex(scale * total)
    if not pp.is_compact():
        raise ImproperIntegralError("quadrature pairing needs compact support")
    s, w = _gauss()
    b = pp.breakpoints
    total = 0j
    for c, bk, hk in zip(pp.pieces, b[:-1], np.diff(b)):
        if not np.any(c):
            continue
        t = bk + hk * s
        total += hk * np.sum(w * f.derivative(t, q) * P.polyval(hk * s, c))
    return complex(total)
