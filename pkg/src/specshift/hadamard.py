"""Hadamard-tensor perturbations whose multimeasure has total variation
``n^{p/2}``, and the weighted direct sum where the p-norm series converges
while the total-variation series diverges.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .herm import decompose
from .multimeasure import MAX_ENTRIES, SizeError, build_m

H2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def hadamard_matrix(k: int) -> np.ndarray:
    """``k``-fold tensor power of the normalized 2x2 Hadamard matrix."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = np.ones((1, 1))
    for _ in range(k):
        out = np.kron(out, H2)
    return out


def coordinate_decomposition(n: int):
    """Spectral data of ``diag(0, 1, ..., n-1)``: one coordinate projector per atom."""
    return decompose(np.arange(n, dtype=float), np.eye(n), cluster_tol=0.0)


def hadamard_tv(k: int, p: int) -> dict:
    n = 2**k
    if not 1 <= k <= 4:
        raise ValueError("k must lie in 1..4")
    if not 2 <= p <= 4:
        raise ValueError("p must lie in 2..4")
    if float(n) ** p > MAX_ENTRIES:
        raise SizeError(f"n^p = {float(n) ** p:.3g} exceeds the enumeration budget")
    v = hadamard_matrix(k)
    D = coordinate_decomposition(n)
    m = build_m([D] * p, [v] * p, prune=False)
    return {"k": k, "n": n, "p": p, "tv": m.total_variation(), "predicted": float(n) ** (p / 2)}


@dataclass(frozen=True)
class SeriesRow:
    K: int
    pnorm_partial: float
    tv_partial: float
    case: str


def direct_sum_divergence(p: int, K: int) -> list[SeriesRow]:
    """Partial sums of ``sum t_k^p alpha(k)`` and ``sum t_k^p alpha(k) n(k)^{p/2-1}``
    over the blocks ``t_k V_{n(k)}``, ``n(k) = 2^k``.

    Case II (normalized trace): ``t_k = 1`` and ``alpha(k)`` proportional to
    ``1/(k n(k)^{p/2-1})``, normalized to total weight one over the
    truncation.  Case I (standard trace): ``alpha(k) = n(k)``, the block's
    multiplicity under the matrix trace, with ``t_k^p = 1/(k n(k)^{p/2})``;
    the products ``t_k^p alpha(k)`` are those of the unnormalized case II.
    """
    if p < 3:
        raise ValueError("the divergence needs p >= 3")
    if not 1 <= K <= 40:
        raise ValueError("K must lie in 1..40")
    k = np.arange(1, K + 1, dtype=float)
    n = 2.0**k
    growth = n ** (p / 2 - 1)
    base = 1.0 / (k * growth)
    cases = {
        "I": (1.0 / (k * n ** (p / 2)), n),
        "II": (np.ones(K), base / base.sum()),
    }
    rows = []
    for tag, (tp, alpha) in cases.items():
        pn = np.cumsum(tp * alpha)
        tv = np.cumsum(tp * alpha * growth)
        rows += [SeriesRow(int(kk), float(a), float(b), tag) for kk, a, b in zip(k, pn, tv)]
    return rows


def series_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K", "pnorm_partial", "tv_partial", "case"])
    for r in rows:
        w.writerow([r.K, repr(r.pnorm_partial), repr(r.tv_partial), r.case])
    return buf.getvalue()
