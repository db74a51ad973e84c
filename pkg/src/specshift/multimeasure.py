"""Finitely supported multiple spectral measures.

At finite dimension the set function
``(A_1, ..., A_d) -> tr[E_1(A_1) V_1 E_2(A_2) V_2 ... E_d(A_d) V_d]``
is a sum of point masses sitting on tuples of eigenvalue clusters.  The
weights are computed in the eigenbases: with ``W_k = U_k^* V_k U_{k+1}``
(cyclically, ``U_{d+1} = U_1``) the weight of an eigen-index tuple is the
cyclic product ``W_1[a_1, a_2] W_2[a_2, a_3] ... W_d[a_d, a_1]``, and
cluster weights are sums over the eigen-indices inside each cluster.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .divdiff import dd_many
from .herm import SpectralDecomposition, eigh, hermitian, hs_norm

MAX_ENTRIES = 10**8
PRUNE_RTOL = 1e-14


class SizeError(ValueError):
    """The requested tensor would exceed the enumeration budget."""


@dataclass(frozen=True)
class AtomicMultiMeasure:
    """Point masses on ``R^d``.

    ``axes[j]`` holds the node values available on coordinate ``j``;
    ``index`` is an ``(N, d)`` array of positions into those axes and
    ``weights`` the ``N`` complex masses.
    """

    axes: tuple
    index: np.ndarray
    weights: np.ndarray
    cluster_tol: float = 1e-12
    kind: str = "m"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def n_atoms(self) -> int:
        return int(self.weights.shape[0])

    def nodes(self) -> np.ndarray:
        """``(N, d)`` array of atom coordinates."""
        if self.n_atoms == 0:
            return np.zeros((0, self.dim))
        return np.stack([np.asarray(ax)[self.index[:, j]] for j, ax in enumerate(self.axes)], axis=1)

    def total_mass(self) -> complex:
        return complex(np.sum(self.weights))

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def weight_of(self, idx) -> complex:
        hit = np.all(self.index == np.asarray(idx)[None, :], axis=1)
        return complex(np.sum(self.weights[hit]))

    def dense(self) -> np.ndarray:
        shape = tuple(len(ax) for ax in self.axes)
        out = np.zeros(shape, dtype=complex)
        if self.n_atoms:
            np.add.at(out, tuple(self.index.T), self.weights)
        return out

    def pair_product(self, f_list) -> complex:
        """``sum_atoms w * prod_j f_j(node_j)``."""
        if len(f_list) != self.dim:
            raise ValueError(f"need {self.dim} functions, got {len(f_list)}")
        if self.n_atoms == 0:
            return 0j
        x = self.nodes()
        vals = np.ones(self.n_atoms, dtype=complex)
        for j, f in enumerate(f_list):
            vals *= f(x[:, j])
        return complex(np.sum(self.weights * vals))

    def pair_divided_difference(self, f, cluster_tol=None) -> complex:
        """``sum_atoms w * Delta^{(d-1)} f(node tuple)``."""
        if self.n_atoms == 0:
            return 0j
        return complex(np.sum(self.weights * dd_many(f, self.nodes(), cluster_tol)))

    def subset(self, mask, kind=None) -> "AtomicMultiMeasure":
        return AtomicMultiMeasure(
            self.axes, self.index[mask], self.weights[mask], self.cluster_tol, kind or self.kind, self.meta
        )

    def diagonal_mask(self, tol=None) -> np.ndarray:
        tol = self.cluster_tol if tol is None else tol
        x = self.nodes()
        if x.shape[0] == 0:
            return np.zeros(0, dtype=bool)
        return (x.max(axis=1) - x.min(axis=1)) <= tol

    def diagonal_scan(self, tol=None):
        """Split into the mass on the diagonal and the off-diagonal remainder."""
        diag = self.diagonal_mask(tol)
        return complex(np.sum(self.weights[diag])), self.subset(~diag)

    def marginal(self, drop: int) -> "AtomicMultiMeasure":
        """Sum out coordinate ``drop``."""
        keep = [j for j in range(self.dim) if j != drop]
        d = self.dense().sum(axis=drop)
        return _from_dense(tuple(self.axes[j] for j in keep), d, 0.0, self.cluster_tol, self.kind)

    def to_dict(self) -> dict:
        x = self.nodes()
        return {
            "kind": self.kind,
            "dim": self.dim,
            "atoms": [
                {"nodes": row.tolist(), "weight": [float(w.real), float(w.imag)]}
                for row, w in zip(x, self.weights)
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _from_dense(axes, tensor, prune, cluster_tol, kind, meta=None) -> AtomicMultiMeasure:
    keep = np.abs(tensor) >= prune if prune > 0 else tensor != 0
    idx = np.argwhere(keep)
    return AtomicMultiMeasure(tuple(np.asarray(a, dtype=float) for a in axes), idx, tensor[keep], cluster_tol, kind, meta or {})


def total_variation(m: AtomicMultiMeasure) -> float:
    return m.total_variation()


def cyclic_tensor(ws) -> np.ndarray:
    """``T[a_1..a_d] = W_1[a_1,a_2] W_2[a_2,a_3] ... W_d[a_d,a_1]``."""
    d = len(ws)
    if d == 1:
        return np.diagonal(ws[0]).copy()
    t = ws[0]
    for w in ws[1:-1]:
        t = t[..., None] * w.reshape((1,) * (t.ndim - 1) + w.shape)
    last = ws[-1].T  # last[a_1, a_d]
    shape = (last.shape[0],) + (1,) * (d - 2) + (last.shape[1],)
    return t * last.reshape(shape)


def aggregate(tensor: np.ndarray, indicators) -> np.ndarray:
    """Sum eigen-index axes into cluster axes with 0/1 indicator matrices."""
    for axis, ind in enumerate(indicators):
        tensor = np.moveaxis(np.tensordot(ind, tensor, axes=([1], [axis])), 0, axis)
    return tensor


def build_m(D_list, V_list, kind: str = "m", prune: bool = True) -> AtomicMultiMeasure:
    """Atomic measure with weights ``tr[P^1_{i_1} V_1 P^2_{i_2} V_2 ... P^d_{i_d} V_d]``."""
    if len(D_list) != len(V_list) or not D_list:
        raise ValueError("need one matrix per spectral decomposition")
    n = D_list[0].n
    for D, V in zip(D_list, V_list):
        if D.n != n or np.shape(V) != (n, n):
            raise ValueError("dimension mismatch between decompositions and matrices")
    d = len(D_list)
    if float(n) ** d > MAX_ENTRIES:
        raise SizeError(f"n^{d} = {float(n) ** d:.3g} exceeds the enumeration budget {MAX_ENTRIES:.0e}")
    us = [D.eigenvectors for D in D_list]
    ws = [us[k].conj().T @ np.asarray(V_list[k], dtype=complex) @ us[(k + 1) % d] for k in range(d)]
    tensor = aggregate(cyclic_tensor(ws), [D.indicator() for D in D_list])
    scale = float(np.prod([hs_norm(V) for V in V_list]))
    tol = max(D.cluster_tol for D in D_list)
    return _from_dense(
        [D.values for D in D_list], tensor, PRUNE_RTOL * scale if prune else 0.0, tol, kind
    )


def _decomp(h, decomp, cluster_tol):
    return decomp if decomp is not None else eigh(h, cluster_tol)


def build_m_plain(h0, v, p: int, decomp: SpectralDecomposition | None = None, cluster_tol=None):
    """``m_p``: every axis carries the spectral measure of ``h0``."""
    if p < 1:
        raise ValueError("order must be >= 1")
    v = hermitian(v)
    D = _decomp(h0, decomp, cluster_tol)
    return build_m([D] * p, [v] * p, kind="m")


def build_m1(h0, v, p: int, decomp: SpectralDecomposition | None = None, cluster_tol=None):
    """``m^(1)_p``: ``m_p`` with a trailing projector axis (``p + 1`` axes)."""
    if p < 1:
        raise ValueError("order must be >= 1")
    v = hermitian(v)
    D = _decomp(h0, decomp, cluster_tol)
    eye = np.eye(D.n, dtype=complex)
    return build_m([D] * (p + 1), [v] * p + [eye], kind="m1")


def build_m2(h0, v, p: int, decomp0=None, decomp1=None, cluster_tol=None):
    """``m^(2)_p``: first axis uses the spectral measure of ``h0 + v``."""
    if p < 1:
        raise ValueError("order must be >= 1")
    h0 = hermitian(h0)
    v = hermitian(v)
    D0 = _decomp(h0, decomp0, cluster_tol)
    D1 = _decomp(h0 + v, decomp1, cluster_tol)
    eye = np.eye(D0.n, dtype=complex)
    return build_m([D1] + [D0] * p, [v] * p + [eye], kind="m2")
