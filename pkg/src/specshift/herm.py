"""Hermitian matrices: Jacobi eigensolver, spectral projectors, matrix
functions, traces and Schatten norms.

Everything downstream works with a :class:`SpectralDecomposition`, the
finite-dimensional stand-in for a projection-valued spectral measure:
eigenvalues that agree within the clustering tolerance are merged into a
single atom carrying one orthogonal projector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12
MAX_SWEEPS = 30
OFFDIAG_RTOL = 1e-13


class HermitianError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class EigenConvergenceError(RuntimeError):
    """Jacobi sweeps did not drive the off-diagonal part below threshold."""


def hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``a`` as Hermitian and return ``(a + a^*) / 2`` as complex.

    The tolerance is absolute on ``|a_ij - conj(a_ji)|``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise HermitianError(f"expected a square matrix, got shape {a.shape}")
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise HermitianError(f"matrix deviates from Hermitian by {dev:.3e} > {tol:.1e}")
    return 0.5 * (a + a.conj().T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # tournament schedule: every pair (p, q) exactly once per sweep, each
    # round made of disjoint pairs so the rotations commute
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            p, q = players[k], players[m - 1 - k]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        if ps:
            rounds.append((np.array(ps), np.array(qs)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(h, max_sweeps: int = MAX_SWEEPS, rtol: float = OFFDIAG_RTOL):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each round of the tournament ordering applies n/2 disjoint complex
    Givens rotations at once.  Returns unsorted ``(eigenvalues,
    eigenvectors)`` with eigenvectors as columns.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    vecs = np.eye(n, dtype=complex)
    if n <= 1:
        return a.diagonal().real.copy(), vecs
    threshold = rtol * np.linalg.norm(a)
    rounds = _round_robin(n)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps + 1):
        off = np.sqrt(np.sum(np.abs(a[offmask]) ** 2))
        if off <= threshold:
            return a.diagonal().real.copy(), vecs
        for ps, qs in rounds:
            apq = a[ps, qs]
            r = np.abs(apq)
            active = r > 0.0
            if not active.any():
                continue
            ps, qs, apq, r = ps[active], qs[active], apq[active], r[active]
            app = a[ps, ps].real
            aqq = a[qs, qs].real
            e = apq / r
            tau = (aqq - app) / (2.0 * r)
            sgn = np.where(tau >= 0.0, 1.0, -1.0)
            big = np.abs(tau) > 1e150
            tau_s = np.where(big, 1.0, tau)
            # for huge |tau| the rotation angle is 1/(2 tau) to full precision
            t = np.where(big, 0.5 / np.where(big, tau, 1.0), sgn / (np.abs(tau_s) + np.sqrt(1.0 + tau_s * tau_s)))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            es = e.conj() * s
            ec = e.conj() * c
            # columns: A <- A G, V <- V G with G = [[c, s], [-conj(e) s, conj(e) c]]
            for mat in (a, vecs):
                colp = mat[:, ps].copy()
                colq = mat[:, qs]
                mat[:, ps] = colp * c - colq * es
                mat[:, qs] = colp * s + colq * ec
            # rows: A <- G^* A
            rowp = a[ps, :].copy()
            rowq = a[qs, :]
            a[ps, :] = c[:, None] * rowp - (e * s)[:, None] * rowq
            a[qs, :] = s[:, None] * rowp + (e * c)[:, None] * rowq
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
            a[ps, ps] = a[ps, ps].real
            a[qs, qs] = a[qs, qs].real
    raise EigenConvergenceError(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e}, "
        f"threshold {threshold:.3e})"
    )


def default_cluster_tol(eigenvalues) -> float:
    ev = np.asarray(eigenvalues, dtype=float)
    spread = float(ev.max() - ev.min()) if ev.size else 0.0
    return max(1e-8 * spread, 1e-12)


def cluster_sorted(values, tol: float) -> np.ndarray:
    """Cluster labels for ascending ``values``: consecutive gaps ``<= tol``
    are chained into one cluster (transitive closure)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return np.zeros(0, dtype=int)
    breaks = np.diff(values) > tol
    return np.concatenate([[0], np.cumsum(breaks)]).astype(int)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues grouped into clusters with one projector each.

    ``values[k]`` is the (mean) eigenvalue of cluster ``k`` and
    ``projectors[k]`` the orthogonal projector onto its eigenspace.
    ``labels[i]`` maps eigenvector column ``i`` to its cluster.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: np.ndarray
    values: np.ndarray
    cluster_tol: float
    projectors: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.values.shape[0]

    @property
    def multiplicities(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_clusters)

    def indicator(self) -> np.ndarray:
        """``(n_clusters, n)`` 0/1 matrix summing eigen-columns into clusters."""
        ind = np.zeros((self.n_clusters, self.n))
        ind[self.labels, np.arange(self.n)] = 1.0
        return ind

    def node_values(self) -> np.ndarray:
        """Cluster value for every eigen-column (exact ties inside a cluster)."""
        return self.values[self.labels]

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,kij->ij", self.values, self.projectors)


def decompose(vals, vecs, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Build a :class:`SpectralDecomposition` from raw eigenpairs."""
    vals = np.asarray(vals, dtype=float)
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = np.asarray(vecs, dtype=complex)[:, order]
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(vals)
    if cluster_tol < 0:
        raise ValueError("cluster_tol must be non-negative")
    labels = cluster_sorted(vals, cluster_tol)
    k = int(labels[-1]) + 1 if labels.size else 0
    counts = np.bincount(labels, minlength=k)
    values = np.bincount(labels, weights=vals, minlength=k) / np.maximum(counts, 1)
    n = vecs.shape[0]
    projectors = np.zeros((k, n, n), dtype=complex)
    for c in range(k):
        cols = vecs[:, labels == c]
        projectors[c] = cols @ cols.conj().T
    return SpectralDecomposition(vals, vecs, labels, values, float(cluster_tol), projectors)


def eigh(h, cluster_tol: float | None = None, method: str = "jacobi") -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Parameters
    ----------
    h : array_like
        Hermitian matrix; validated and symmetrized.
    cluster_tol : float, optional
        Eigenvalues closer than this (chained) share one projector.
        Defaults to ``max(1e-8 * spectral range, 1e-12)``.
    method : {"jacobi", "lapack"}
        ``"jacobi"`` is the self-contained solver; ``"lapack"`` defers to
        :func:`numpy.linalg.eigh` and is used for cross-checks.
    """
    h = hermitian(h)
    if method == "jacobi":
        vals, vecs = jacobi_eigh(h)
    elif method == "lapack":
        vals, vecs = np.linalg.eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return decompose(vals, vecs, cluster_tol)


def matrix_function(f, decomp: SpectralDecomposition) -> np.ndarray:
    """``f(H) = sum_k f(lambda_k) P_k`` for a scalar function ``f``."""
    fv = np.asarray(f(decomp.values), dtype=complex)
    return np.einsum("k,kij->ij", fv, decomp.projectors)


def resolvent(h, z) -> np.ndarray:
    """``(z - H)^{-1}`` by a dense solve."""
    h = np.asarray(h, dtype=complex)
    return np.linalg.inv(z * np.eye(h.shape[0]) - h)


def singular_values(a) -> np.ndarray:
    return np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)


def schatten_norm(a, p: float = 2.0) -> float:
    """``(sum s_i^p)^(1/p)`` over singular values; ``p = inf`` is the operator norm."""
    if p < 1:
        raise ValueError("Schatten index must satisfy p >= 1")
    s = singular_values(a)
    if np.isinf(p):
        return float(s.max()) if s.size else 0.0
    return float(np.sum(s**p) ** (1.0 / p))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def op_norm(a) -> float:
    return schatten_norm(a, np.inf)


class TraceNorms(NamedTuple):
    trace: complex
    schatten: float
    hs_norm: float
    op_norm: float


def trace_and_norms(a, p: float = 2.0) -> TraceNorms:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("trace_and_norms needs a square matrix")
    return TraceNorms(complex(np.trace(a)), schatten_norm(a, p), hs_norm(a), op_norm(a))


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """GUE-like sample normalized so the Hilbert-Schmidt norm is about ``scale * sqrt(n)``."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (g + g.conj().T) / (2.0 * np.sqrt(n))
