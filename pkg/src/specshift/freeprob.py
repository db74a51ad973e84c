"""Noncrossing partitions, Kreweras complements, free cumulants and the
multimeasure ``m_p`` of a pair that is free with respect to a normalized trace.

When ``H_0`` and ``V`` are free,

    m_p(A_1 x ... x A_p) = sum_{pi in NC(p)} kappa_{K(pi)}(V) prod_{B in pi} tau(E(cap_{i in B} A_i)),

so ``m_p`` is a combination of pushforwards of product measures onto the
block-constant tuples of each ``pi``.  Everything here uses the normalized
trace ``tau(I) = 1``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy.stats import ortho_group

from .multimeasure import AtomicMultiMeasure
from .report import ReportRow
from .ssf import spline_density

MAX_NC_ORDER = 10


class SizeError(ValueError):
    pass


def catalan(p: int) -> int:
    return comb(2 * p, p) // (p + 1)


def set_partitions(p: int):
    """All set partitions of ``{1..p}`` via restricted growth strings."""
    def grow(prefix, top):
        if len(prefix) == p:
            yield prefix
            return
        for b in range(top + 2):
            yield from grow(prefix + [b], max(top, b))

    if p == 0:
        yield ()
        return
    for rgs in grow([0], 0):
        blocks = {}
        for i, b in enumerate(rgs, start=1):
            blocks.setdefault(b, []).append(i)
        yield tuple(tuple(v) for v in blocks.values())


def is_noncrossing(blocks) -> bool:
    """No ``a < b < c < d`` with ``a, c`` in one block and ``b, d`` in another."""
    where = {x: k for k, blk in enumerate(blocks) for x in blk}
    pts = sorted(where)
    for a, b, c, d in itertools.combinations(pts, 4):
        if where[a] == where[c] and where[b] == where[d] and where[a] != where[b]:
            return False
    return True


def _canonical(blocks):
    return tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))


@dataclass(frozen=True)
class NoncrossingPartition:
    p: int
    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", _canonical(self.blocks))
        flat = sorted(x for b in self.blocks for x in b)
        if flat != list(range(1, self.p + 1)):
            raise ValueError("blocks must partition {1..p}")
        if not is_noncrossing(self.blocks):
            raise ValueError(f"{self.blocks} is crossing")

    def __len__(self):
        return len(self.blocks)

    def block_of(self) -> np.ndarray:
        out = np.zeros(self.p, dtype=int)
        for k, b in enumerate(self.blocks):
            for x in b:
                out[x - 1] = k
        return out


@lru_cache(maxsize=None)
def _nc(p: int):
    return tuple(
        NoncrossingPartition(p, blocks)
        for blocks in sorted((_canonical(b) for b in set_partitions(p) if is_noncrossing(b)))
    )


def enumerate_nc(p: int) -> list[NoncrossingPartition]:
    """``NC(p)`` in canonical order."""
    if not 1 <= p <= MAX_NC_ORDER:
        raise SizeError(f"order {p} outside 1..{MAX_NC_ORDER}")
    return list(_nc(p))


def kreweras(pi: NoncrossingPartition) -> NoncrossingPartition:
    """Largest partition of the primed points compatible with ``pi``.

    Points are interleaved as ``1 < 1' < 2 < 2' < ... < p < p'``.  Starting
    from singletons, primed blocks are merged while the union with ``pi``
    stays noncrossing; the compatible partitions form a down-set with a
    unique maximum, so the greedy search ends there.
    """
    p = pi.p
    unprimed = [tuple(2 * x - 1 for x in b) for b in pi.blocks]
    primed = [[2 * i] for i in range(1, p + 1)]
    merged = True
    while merged:
        merged = False
        for a, b in itertools.combinations(range(len(primed)), 2):
            trial = [blk for k, blk in enumerate(primed) if k not in (a, b)] + [primed[a] + primed[b]]
            if is_noncrossing(unprimed + [tuple(t) for t in trial]):
                primed = trial
                merged = True
                break
    return NoncrossingPartition(p, [tuple(x // 2 for x in b) for b in primed])


def kreweras_permutation(pi: NoncrossingPartition) -> NoncrossingPartition:
    """``K(pi)`` as the cycles of ``pi^{-1} gamma`` with ``gamma = (1 2 ... p)``."""
    p = pi.p
    nxt = {}
    for b in pi.blocks:
        for i, x in enumerate(b):
            nxt[x] = b[(i + 1) % len(b)]
    inv = {v: k for k, v in nxt.items()}
    perm = {x: inv[x % p + 1] for x in range(1, p + 1)}
    seen, cycles = set(), []
    for x in range(1, p + 1):
        if x in seen:
            continue
        cyc = []
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = perm[x]
        cycles.append(tuple(cyc))
    return NoncrossingPartition(p, cycles)


def _partition_product(pi: NoncrossingPartition, seq) -> complex:
    out = 1.0 + 0j
    for b in pi.blocks:
        out *= seq[len(b) - 1]
    return out


def free_cumulants(moments) -> np.ndarray:
    """``kappa_n = m_n - sum_{pi != 1_n} prod_B kappa_{|B|}``."""
    moments = np.asarray(moments, dtype=complex)
    kappa = np.zeros(moments.size, dtype=complex)
    for n in range(1, moments.size + 1):
        acc = moments[n - 1]
        for pi in enumerate_nc(n):
            if len(pi) == 1:
                continue
            acc -= _partition_product(pi, kappa)
        kappa[n - 1] = acc
    return kappa if np.iscomplexobj(moments) and np.any(moments.imag) else kappa.real


def moments_from_cumulants(kappa) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=complex)
    out = np.array([sum(_partition_product(pi, kappa) for pi in enumerate_nc(n)) for n in range(1, kappa.size + 1)])
    return out if np.any(out.imag) else out.real


@dataclass(frozen=True)
class FreeModel:
    """Spectral distribution of ``H_0`` and moments of ``V`` under a
    normalized trace."""

    h0_atoms: np.ndarray
    h0_weights: np.ndarray
    v_moments: np.ndarray
    v_spectrum: np.ndarray | None = None

    def __post_init__(self):
        atoms = np.asarray(self.h0_atoms, dtype=float).ravel()
        w = np.asarray(self.h0_weights, dtype=float).ravel()
        if atoms.size != w.size or atoms.size == 0:
            raise ValueError("h0_atoms and h0_weights must be nonempty and equally long")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("h0_weights must be non-negative and sum to 1")
        object.__setattr__(self, "h0_atoms", atoms)
        object.__setattr__(self, "h0_weights", w)
        object.__setattr__(self, "v_moments", np.asarray(self.v_moments, dtype=float).ravel())
        if self.v_spectrum is not None:
            spec = np.asarray(self.v_spectrum, dtype=float).ravel()
            object.__setattr__(self, "v_spectrum", spec)
            k = self.v_moments.size
            mom = np.array([np.mean(spec**j) for j in range(1, k + 1)])
            if np.max(np.abs(mom - self.v_moments)) > 1e-9:
                raise ValueError("v_spectrum is inconsistent with v_moments")

    @classmethod
    def from_spectrum(cls, h0_atoms, h0_weights, v_spectrum, order: int):
        spec = np.asarray(v_spectrum, dtype=float)
        return cls(h0_atoms, h0_weights, [np.mean(spec**j) for j in range(1, order + 1)], spec)

    @classmethod
    def from_dict(cls, d):
        return cls(d["h0_atoms"], d["h0_weights"], d["v_moments"], d.get("v_spectrum"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        out = {
            "h0_atoms": self.h0_atoms.tolist(),
            "h0_weights": self.h0_weights.tolist(),
            "v_moments": self.v_moments.tolist(),
        }
        if self.v_spectrum is not None:
            out["v_spectrum"] = self.v_spectrum.tolist()
        return out


def free_multimeasure(model: FreeModel, p: int) -> AtomicMultiMeasure:
    """``sum_{pi in NC(p)} kappa_{K(pi)} gamma_{p, pi}`` as an atomic measure."""
    if model.v_moments.size < p:
        raise ValueError(f"need {p} moments of V, model has {model.v_moments.size}")
    kappa = free_cumulants(model.v_moments[:p])
    a = model.h0_atoms.size
    tensor = np.zeros((a,) * p)
    for pi in enumerate_nc(p):
        k = _partition_product(kreweras(pi), kappa).real
        if k == 0.0:
            continue
        # gamma_{p,pi}: one free atom per block, coordinates copy their block's atom
        blk = pi.block_of()
        grids = np.meshgrid(*([np.arange(a)] * len(pi)), indexing="ij")
        w = np.ones(grids[0].shape)
        for g in grids:
            w = w * model.h0_weights[g]
        idx = tuple(grids[b].ravel() for b in blk)
        np.add.at(tensor, idx, k * w.ravel())
    keep = tensor != 0.0
    return AtomicMultiMeasure(
        tuple([model.h0_atoms] * p), np.argwhere(keep), tensor[keep].astype(complex), 0.0, "m_free"
    )


def free_multimeasure1(model: FreeModel, p: int) -> AtomicMultiMeasure:
    """The free ``m^(1)_p``: by cyclicity of the trace the trailing projector
    merges with the first one, so this is the pushforward of ``m_free``
    under ``(l_1, ..., l_p) -> (l_1, ..., l_p, l_1)``."""
    m = free_multimeasure(model, p)
    index = np.concatenate([m.index, m.index[:, :1]], axis=1)
    return AtomicMultiMeasure(m.axes + m.axes[:1], index, m.weights, m.cluster_tol, "m1_free")


def free_chain_rows(model: FreeModel, p: int):
    """Spline density of the free ``m^(1)_p`` plus its diagonal point masses
    ``w/p!``: the total mass must be ``tau(V^p)/p!``."""
    pp, diag = spline_density(free_multimeasure1(model, p))
    mass = pp.integral() + diag.total_mass() / factorial(p)
    target = complex(model.v_moments[p - 1]) / factorial(p)
    return [ReportRow("free_trace_chain", f"p={p}", complex(mass), target, 1e-10, {"p": p})]


def cumulant_weight_sum(model: FreeModel, p: int) -> float:
    """``sum_pi |kappa_{K(pi)}|``, an upper bound for the total variation."""
    kappa = free_cumulants(model.v_moments[:p])
    return float(sum(abs(_partition_product(kreweras(pi), kappa)) for pi in enumerate_nc(p)))


def mixed_moment(m: AtomicMultiMeasure, exponents) -> complex:
    x = m.nodes()
    return complex(np.sum(m.weights * np.prod(x ** np.asarray(exponents)[None, :], axis=1)))


def exponent_tuples(p: int, max_total: int):
    return [a for a in itertools.product(range(max_total + 1), repeat=p) if sum(a) <= max_total]


def _stratified(atoms, weights, n):
    counts = np.floor(weights * n).astype(int)
    short = n - counts.sum()
    order = np.argsort(-(weights * n - counts), kind="stable")
    counts[order[:short]] += 1
    return np.repeat(atoms, counts)


def asymptotic_freeness_mc(model: FreeModel, p: int, n: int = 200, samples: int = 20, seed: int = 0,
                           max_total: int = 4, tol: float = 5e-2) -> dict:
    """Mixed moments of ``m_free`` against ``(1/n) Tr[H_0^{a_1} V H_0^{a_2} V ...]``
    with ``V`` rotated by Haar-random orthogonal matrices.

    ``H_0`` and the spectrum of ``V`` are laid out deterministically in
    proportion to their weights; only the rotation is random.
    """
    if n < 100:
        raise ValueError("sample dimension must be at least 100")
    if model.v_spectrum is None:
        raise ValueError("the Monte-Carlo check needs a concrete V spectrum")
    m = free_multimeasure(model, p)
    h = _stratified(model.h0_atoms, model.h0_weights, n)
    spec = model.v_spectrum
    vdiag = _stratified(spec, np.full(spec.size, 1.0 / spec.size), n)
    tuples = exponent_tuples(p, max_total)
    target = np.array([mixed_moment(m, a).real for a in tuples])
    seeds = np.random.SeedSequence(seed).spawn(samples)
    acc = np.zeros(len(tuples))
    for ss in seeds:
        u = ortho_group.rvs(n, random_state=np.random.default_rng(ss))
        v = (u * vdiag) @ u.T
        for i, a in enumerate(tuples):
            prod = np.eye(n)
            for e in a:
                prod = (prod * h**e) @ v
            acc[i] += np.trace(prod) / n
    acc /= samples
    dev = float(np.max(np.abs(acc - target)))
    return {"p": p, "n": n, "samples": samples, "seed": seed, "max_deviation": dev, "tol": tol, "pass": dev <= tol}


def free_mass_rows(model: FreeModel, p: int):
    m = free_multimeasure(model, p)
    return [ReportRow("free_total_mass", f"p={p}", m.total_mass(), complex(model.v_moments[p - 1]), 1e-12, {"p": p})]
