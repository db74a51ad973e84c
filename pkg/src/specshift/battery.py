"""Property battery: one routine per verified claim, parameterized by scale.

Each routine returns a :class:`CriterionResult`; the acceptance tests run
them at full scale and the ``suite`` command at a reduced one.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, log

import numpy as np

from . import freeprob, hadamard
from .divdiff import dd_eval, dd_peano
from .functions import Exponential, Monomial, Polynomial, fz
from .herm import eigh, hs_norm, random_hermitian, schatten_norm
from .multimeasure import build_m, build_m1, build_m2, build_m_plain
from .pspline import basic_spline
from .ssf import (
    cauchy_identity_rows,
    eta_recursive,
    eta_spline_rep,
    koplienko_eta2,
    l1_distance,
    spectral_average_first,
    spectral_average_higher,
    verify_trace_formula,
)
from .taylor import gateaux_derivative, remainder_resolvent_closed


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    worst: float
    detail: str
    elapsed: float = 0.0
    budget: float | None = None
    informational: bool = False
    failures: list = field(default_factory=list)

    @property
    def within_budget(self) -> bool:
        return self.budget is None or self.elapsed <= self.budget

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        if self.informational:
            status += " (informational)"
        budget = f" / budget {self.budget:.0f}s" if self.budget is not None else ""
        return f"[{status}] criterion {self.number}: {self.title} | {self.detail} | {self.elapsed:.2f}s{budget}"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "pass": self.ok,
            "worst": self.worst,
            "detail": self.detail,
            "elapsed": self.elapsed,
            "budget": self.budget,
            "informational": self.informational,
            "failures": self.failures[:20],
        }


@dataclass(frozen=True)
class Instance:
    index: int
    n: int
    p: int
    h0: np.ndarray
    v: np.ndarray


def random_instances(seed: int, count: int, max_n: int = 6, orders=(1, 2, 3, 4), min_n: int = 1):
    """Seeded random pairs; orders cycle through ``orders``."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(min_n, max_n + 1))
        p = orders[i % len(orders)]
        h0 = random_hermitian(n, rng, 1.0)
        v = random_hermitian(n, rng, float(rng.uniform(0.3, 1.0)))
        out.append(Instance(i, n, p, h0, v))
    return out


def _pmap(fn, items, jobs):
    if jobs is None or jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _timed(fn):
    def wrapper(*args, **kwargs):
        t = time.perf_counter()
        res = fn(*args, **kwargs)
        res.elapsed = time.perf_counter() - t
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# 1 ---------------------------------------------------------------------
@_timed
def hadamard_total_variation(ks=(1, 2, 3, 4), ps=(2, 3, 4)) -> CriterionResult:
    worst, fails = 0.0, []
    for k, p in itertools.product(ks, ps):
        if float(2**k) ** p > 1e8:
            continue
        r = hadamard.hadamard_tv(k, p)
        err = abs(r["tv"] - r["predicted"]) / r["predicted"]
        worst = max(worst, err)
        if err > 1e-9:
            fails.append(r)
    return CriterionResult(1, "Hadamard total variation n^{p/2}", not fails, worst,
                           f"max rel err {worst:.2e} (tol 1e-9)", budget=5.0, failures=fails)


# 2-4 -------------------------------------------------------------------
@dataclass
class InstanceReport:
    inst: Instance
    rows: list
    cross: list
    eta_rec: object
    eta_spl: object


def trace_functions(p):
    return (
        [Monomial(p), Monomial(p + 2), Monomial(p + 4)]
        + [fz(2j), fz(0.5 + 1j), fz(-0.7 - 1.5j)]
        + [Exponential(1.0), Exponential(-2.0)]
    )


def analyse_instance(inst: Instance) -> InstanceReport:
    d0, d1 = eigh(inst.h0), eigh(inst.h0 + inst.v)
    rec = eta_recursive(inst.h0, inst.v, inst.p, d0, d1)
    spl = eta_spline_rep(inst.h0, inst.v, inst.p, d0, d1)
    rows, cross = verify_trace_formula(inst.h0, inst.v, inst.p, trace_functions(inst.p),
                                       etas={"recursive": rec, "spline": spl}, params={"instance": inst.index})
    return InstanceReport(inst, rows, cross, rec, spl)


def analyse_all(instances, jobs=None):
    return _pmap(analyse_instance, instances, jobs)


@_timed
def trace_formula(reports) -> CriterionResult:
    worst = max(r.rel_err for rep in reports for r in rep.rows)
    cross = max(r.rel_err for rep in reports for r in rep.cross)
    fails = [r.to_dict() for rep in reports for r in rep.rows + rep.cross if not r.passed]
    return CriterionResult(2, "trace formula, two density routes, two remainder routes", not fails, worst,
                           f"{len(reports)} instances, max rel residual {worst:.2e}, "
                           f"remainder-route agreement {cross:.2e}", budget=60.0, failures=fails)


@_timed
def normalization_and_variation(reports, krein_trace_norm: bool = False) -> CriterionResult:
    """``int eta_p = tr(V^p)/p!`` and ``int |eta_p| <= ||V||_2^p / p!``.

    With ``krein_trace_norm`` the order-one bound is taken in the trace norm
    ``||V||_1``, which is the bound that holds for Krein's function.
    """
    worst_norm, worst_tv, fails = 0.0, -np.inf, []
    for rep in reports:
        inst = rep.inst
        p, v = inst.p, inst.v
        target = np.trace(np.linalg.matrix_power(v, p)).real / factorial(p)
        for eta in (rep.eta_rec, rep.eta_spl):
            err = abs(eta.integral() - target)
            worst_norm = max(worst_norm, err)
            if err > 1e-9:
                fails.append({"instance": inst.index, "p": p, "kind": "normalization", "err": err})
            norm = schatten_norm(v, 1) if (p == 1 and krein_trace_norm) else hs_norm(v) ** p / factorial(p)
            excess = eta.abs_integral() - norm
            worst_tv = max(worst_tv, excess)
            if excess > 1e-9:
                fails.append({"instance": inst.index, "n": inst.n, "p": p, "kind": "variation",
                              "abs_integral": eta.abs_integral(), "bound": norm})
    ps = sorted({f["p"] for f in fails})
    bound = "||V||_1 at p=1, ||V||_2^p/p! otherwise" if krein_trace_norm else "||V||_2^p/p!"
    detail = f"max normalization err {worst_norm:.2e}; max excess over {bound}: {worst_tv:.2e}"
    if fails:
        detail += f"; {len(fails)} violations at orders {ps}"
    return CriterionResult(3, "normalization and total-variation bound", not fails, max(worst_norm, worst_tv),
                           detail, failures=fails)


@_timed
def route_equivalence(reports) -> CriterionResult:
    worst, worst_l1, fails = 0.0, 0.0, []
    for rep in reports:
        p = rep.inst.p
        for k in range(2 * p + 1):
            a, b = rep.eta_rec.moment(k), rep.eta_spl.moment(k)
            err = abs(a - b) / max(1.0, abs(a))
            worst = max(worst, err)
            if err > 1e-8:
                fails.append({"instance": rep.inst.index, "p": p, "k": k, "rel_err": err})
        if p == 2:
            kop = koplienko_eta2(rep.inst.h0, rep.inst.v)
            for eta in (rep.eta_rec, rep.eta_spl):
                d = l1_distance(eta, kop)
                worst_l1 = max(worst_l1, d)
                if d > 1e-8:
                    fails.append({"instance": rep.inst.index, "kind": "koplienko_l1", "dist": d})
    return CriterionResult(4, "recursive vs spline densities", not fails, max(worst, worst_l1),
                           f"max moment rel err {worst:.2e}; max L1 to explicit order-2 formula {worst_l1:.2e}",
                           failures=fails)


# 5 ---------------------------------------------------------------------
@_timed
def koplienko_positivity(seed: int = 5, count: int = 100, max_n: int = 6) -> CriterionResult:
    worst_min, worst_int, fails = 0.0, 0.0, []
    for inst in random_instances(seed, count, max_n, orders=(2,)):
        eta = koplienko_eta2(inst.h0, inst.v)
        mn = eta.minimum()
        err = abs(eta.integral() - hs_norm(inst.v) ** 2 / 2)
        worst_min = min(worst_min, mn)
        worst_int = max(worst_int, err)
        if mn < -1e-12 or err > 1e-9:
            fails.append({"instance": inst.index, "min": mn, "int_err": err})
    return CriterionResult(5, "order-2 density non-negative with mass ||V||_2^2/2", not fails, worst_int,
                           f"{count} instances, min value {worst_min:.2e}, max mass err {worst_int:.2e}",
                           failures=fails)


# 6 ---------------------------------------------------------------------
def shared_eigenvalue_instance():
    h0 = np.diag([0.0, 0.0, 1.0])
    v = np.zeros((3, 3))
    v[0, 2] = v[2, 0] = 1.0
    return h0, v


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@_timed
def multimeasure_suite(seed: int = 6, count: int = 200, max_n: int = 5, max_p: int = 4) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = {"tv": -np.inf, "neg": 0.0, "imag": 0.0, "diag": 0.0, "pair": 0.0}
    fails = []
    h0s, vs = shared_eigenvalue_instance()
    cases = [(h0s, vs, 2, None)] + [None] * count
    for i, case in enumerate(cases):
        if case is None:
            n = int(rng.integers(2, max_n + 1))
            p = int(rng.integers(2, max(2, max_p) + 1))
            h0 = random_hermitian(n, rng)
            v = random_hermitian(n, rng, float(rng.uniform(0.3, 1.5)))
            extra = (random_hermitian(n, rng), random_hermitian(n, rng, 0.8))
        else:
            h0, v, p, extra = case
            n = h0.shape[0]
        d0 = eigh(h0)
        m = build_m_plain(h0, v, p, decomp=d0)
        worst["tv"] = max(worst["tv"], m.total_variation() - hs_norm(v) ** p)
        if extra is not None:
            # mixed decompositions and perturbations
            ds = [d0, eigh(extra[0]), eigh(h0 + v)][: min(p, 3)]
            ws = [v, extra[1], v @ v / max(hs_norm(v), 1e-300)][: len(ds)]
            mg = build_m(ds, ws)
            worst["tv"] = max(worst["tv"], mg.total_variation() - np.prod([hs_norm(w) for w in ws]))
        m2plain = build_m_plain(h0, v, 2, decomp=d0)
        worst["neg"] = min(worst["neg"], float(np.min(m2plain.weights.real, initial=0.0)))
        worst["imag"] = max(worst["imag"], float(np.max(np.abs(m2plain.weights.imag), initial=0.0)))
        m21 = build_m2(h0, v, 1, decomp0=d0)
        worst["imag"] = max(worst["imag"], float(np.max(np.abs(m21.weights.imag), initial=0.0)))
        m2 = build_m2(h0, v, p, decomp0=d0)
        dm, _ = m2.diagonal_scan()
        worst["diag"] = max(worst["diag"], abs(dm))
        z = complex(rng.uniform(-1, 1), rng.choice([-1, 1]) * rng.uniform(0.5, 2))
        r0 = np.linalg.inv(z * np.eye(n) - h0)
        direct = np.trace(np.linalg.matrix_power(r0 @ v, p))
        errs = [
            _rel(m.pair_product([fz(z)] * p), direct),
            _rel(m2.pair_divided_difference(fz(z)), np.trace(remainder_resolvent_closed(h0, v, p, z))),
        ]
        f = Exponential(float(rng.uniform(-2, 2)))
        m1 = build_m1(h0, v, p, decomp=d0)
        errs.append(_rel(factorial(p) * m1.pair_divided_difference(f), np.trace(gateaux_derivative(h0, v, p, f, d0))))
        worst["pair"] = max(worst["pair"], max(errs))
        bad = []
        if worst["tv"] > 1e-9:
            bad.append("tv")
        if worst["neg"] < -1e-12:
            bad.append("neg")
        if worst["imag"] > 1e-12:
            bad.append("imag")
        if worst["diag"] > 1e-10:
            bad.append("diag")
        if max(errs) > 1e-10:
            bad.append("pair")
        if bad:
            fails.append({"case": i, "n": n, "p": p, "failed": bad, "pair_errs": errs})
    detail = (f"{len(cases)} cases; TV excess {worst['tv']:.2e}, min m_2 weight {worst['neg']:.2e}, "
              f"max Im {worst['imag']:.2e}, diagonal mass {worst['diag']:.2e}, pairing rel err {worst['pair']:.2e}")
    return CriterionResult(6, "multimeasure lemmas", not fails, worst["pair"], detail, budget=30.0, failures=fails)


# 7 ---------------------------------------------------------------------
def _random_nodes(rng, p, confluent_rate=0.2):
    x = rng.uniform(-1.0, 1.0, p + 1)
    if p >= 1 and rng.random() < confluent_rate:
        i, j = rng.choice(p + 1, 2, replace=False)
        x[i] = x[j]
    return x


def _resolvent_dd_exact(z, x) -> complex:
    """Recursive definition of the divided difference of ``1/(z - t)`` in
    exact rational arithmetic (floats are dyadic rationals), rounded once."""
    zr, zi = Fraction(z.real), Fraction(z.imag)

    def inv_pow(node, k):
        # (z - node)^(-k) as a pair of Fractions
        a, b = zr - node, zi
        den = a * a + b * b
        re, im = a / den, -b / den
        out = (Fraction(1), Fraction(0))
        for _ in range(k):
            out = (out[0] * re - out[1] * im, out[0] * im + out[1] * re)
        return out

    xs = [Fraction(float(t)) for t in np.sort(x)]
    m = len(xs)
    level = [inv_pow(t, 1) for t in xs]
    for j in range(1, m):
        nxt = []
        for i in range(m - j):
            gap = xs[i + j] - xs[i]
            if gap == 0:
                nxt.append(inv_pow(xs[i], j + 1))
            else:
                a, b = level[i + 1], level[i]
                nxt.append(((a[0] - b[0]) / gap, (a[1] - b[1]) / gap))
        level = nxt
    return complex(float(level[0][0]), float(level[0][1]))


@_timed
def divided_difference_suite(seed: int = 7, count: int = 500) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(["sym", "lead", "bound", "peano", "res", "spl_neg", "spl_int", "spl_supp"], 0.0)
    fails = []
    for i in range(count):
        p = int(rng.integers(1, 6))
        x = _random_nodes(rng, p)
        z = complex(rng.uniform(-1, 1), rng.choice([-1, 1]) * rng.uniform(0.3, 2))
        # symmetry
        f = [Exponential(float(rng.uniform(-3, 3))), fz(z), Monomial(int(rng.integers(0, 8)))][i % 3]
        base = dd_eval(f, x)
        perm = dd_eval(f, rng.permutation(x))
        worst["sym"] = max(worst["sym"], abs(base - perm) / max(abs(base), 1e-300) if base != 0 else abs(perm))
        # leading coefficient
        q = int(rng.integers(1, 7))
        coeffs = rng.normal(size=q + 1)
        lead = dd_eval(Polynomial(coeffs), _random_nodes(rng, q))
        worst["lead"] = max(worst["lead"], abs(lead - coeffs[-1]) / abs(coeffs[-1]))
        # bound on [a, b] = [min, max] of the nodes
        a, b = x.min(), x.max()
        g = fz(z)
        dist = abs(z.imag) if a <= z.real <= b else min(abs(z - a), abs(z - b))
        bound = 1.0 / dist ** (p + 1)  # max |g^{(p)}| / p!
        worst["bound"] = max(worst["bound"], abs(dd_eval(g, x)) / bound - 1.0)
        e = Exponential(float(rng.uniform(-3, 3)))
        worst["bound"] = max(worst["bound"], abs(dd_eval(e, x)) / (abs(e.s) ** p / factorial(p)) - 1.0)
        # resolvent product
        exact = _resolvent_dd_exact(z, x)
        res = abs(dd_eval(g, x) - exact) / max(1.0, abs(exact))
        worst["res"] = max(worst["res"], res)
        # Peano and basic spline (needs two distinct clusters)
        if np.ptp(x) > 0:
            k = int(rng.integers(p, 7))
            ref = dd_eval(Monomial(k), x)
            pe = abs(dd_peano(Monomial(k), x) - ref) / max(abs(ref), 1e-300) if ref != 0 else 0.0
            worst["peano"] = max(worst["peano"], pe)
            s = basic_spline(x)
            lo, hi = s.extrema()
            worst["spl_neg"] = min(worst["spl_neg"], lo / hi)
            worst["spl_int"] = max(worst["spl_int"], abs(s.integral() * p - 1.0))
            supp = float(s.tail_norm() != 0.0 or s.breakpoints[0] < a or s.breakpoints[-1] > b)
            worst["spl_supp"] = max(worst["spl_supp"], supp)
    limits = {"sym": 1e-12, "lead": 1e-10, "bound": 1e-12, "peano": 1e-9, "res": 1e-12,
              "spl_int": 1e-10, "spl_supp": 0.0}
    for key, lim in limits.items():
        if worst[key] > lim:
            fails.append({"property": key, "worst": worst[key], "limit": lim})
    if worst["spl_neg"] < -1e-12:
        fails.append({"property": "spl_neg", "worst": worst["spl_neg"], "limit": -1e-12})
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return CriterionResult(7, "divided differences and basic splines", not fails, worst["peano"],
                           f"{count} cases each: {detail}", budget=10.0, failures=fails)


# 8 ---------------------------------------------------------------------
@_timed
def cauchy_suite(seed: int = 8, count: int = 50, max_n: int = 5, n_z: int = 5, orders=(1, 2, 3),
                 jobs=None) -> CriterionResult:
    insts = random_instances(seed, count, max_n, orders=orders)
    rng = np.random.default_rng(seed + 1000)
    zs_all = [[complex(rng.uniform(-2, 2), rng.choice([-1, 1]) * rng.uniform(0.2, 2)) for _ in range(n_z)]
              for _ in insts]

    def run(args):
        inst, zs = args
        return cauchy_identity_rows(inst.h0, inst.v, inst.p, zs)

    rows = [r for chunk in _pmap(run, list(zip(insts, zs_all)), jobs) for r in chunk]
    worst = max(r.rel_err for r in rows)
    fails = [r.to_dict() for r in rows if not r.passed]
    return CriterionResult(8, "Cauchy-transform identities", not fails, worst,
                           f"{count} instances x {n_z} points, max rel err {worst:.2e} (tol 1e-8)", failures=fails)


# 9 ---------------------------------------------------------------------
@_timed
def averaging_suite(seed: int = 9, count: int = 20, max_n: int = 4, quad_nodes: int = 64, jobs=None) -> CriterionResult:
    insts = random_instances(seed, count, max_n, orders=(2,))

    def run(inst):
        rows = spectral_average_first(inst.h0, inst.v, quad_nodes=quad_nodes)
        for p in (2, 3):
            rows += spectral_average_higher(inst.h0, inst.v, p, quad_nodes=quad_nodes)
        return rows

    rows = [r for chunk in _pmap(run, insts, jobs) for r in chunk]
    first = max(r.rel_err for r in rows if r.identity.startswith("spectral_average_1"))
    higher = max(r.rel_err for r in rows if r.identity == "spectral_average_p")
    fails = [r.to_dict() for r in rows if not r.passed]
    return CriterionResult(9, "spectral averaging, first and higher order", not fails, higher,
                           f"{count} instances, first-order {first:.2e} (tol 1e-9), p=2,3 {higher:.2e} (tol 1e-6)",
                           budget=60.0, failures=fails)


# 10 --------------------------------------------------------------------
def random_free_model(rng, order):
    a = int(rng.integers(1, 5))
    atoms = np.sort(rng.uniform(-2, 2, a))
    w = rng.dirichlet(np.ones(a))
    spec = rng.uniform(-1.5, 1.5, int(rng.integers(1, 5)))
    return freeprob.FreeModel.from_spectrum(atoms, w, spec, order)


@_timed
def free_suite(seed: int = 10, count: int = 50, mc: bool = False, mc_n: int = 200, mc_samples: int = 20) -> CriterionResult:
    rng = np.random.default_rng(seed)
    fails = []
    counts = [len(freeprob.enumerate_nc(p)) for p in range(1, 9)]
    if counts != [freeprob.catalan(p) for p in range(1, 9)]:
        fails.append({"property": "catalan", "counts": counts})
    worst_rt, worst_mass, worst_tv, worst_chain = 0.0, 0.0, -np.inf, 0.0
    for _ in range(count):
        # moments of a random atomic probability measure on [-2, 2]
        atoms = rng.uniform(-2.0, 2.0, int(rng.integers(1, 6)))
        prob = rng.dirichlet(np.ones(atoms.size))
        mom = np.array([prob @ atoms**k for k in range(1, int(rng.integers(2, 9)))])
        back = freeprob.moments_from_cumulants(freeprob.free_cumulants(mom))
        worst_rt = max(worst_rt, float(np.max(np.abs(back - mom) / np.maximum(1.0, np.abs(mom)))))
        p = int(rng.integers(1, 6))
        model = random_free_model(rng, p)
        m = freeprob.free_multimeasure(model, p)
        worst_mass = max(worst_mass, abs(m.total_mass() - model.v_moments[p - 1]))
        worst_tv = max(worst_tv, m.total_variation() - freeprob.cumulant_weight_sum(model, p))
        worst_chain = max(worst_chain, freeprob.free_chain_rows(model, p)[0].rel_err)
    if worst_rt > 1e-12:
        fails.append({"property": "round_trip", "worst": worst_rt})
    if worst_mass > 1e-12:
        fails.append({"property": "mass", "worst": worst_mass})
    if worst_tv > 1e-12:
        fails.append({"property": "tv_bound", "worst": worst_tv})
    if worst_chain > 1e-10:
        fails.append({"property": "trace_chain", "worst": worst_chain})
    detail = (f"NC counts {counts}; round trip {worst_rt:.1e}; mass {worst_mass:.1e}; "
              f"TV over cumulant bound {worst_tv:.1e}; spline-density mass {worst_chain:.1e}")
    informational = False
    if mc:
        model = freeprob.FreeModel.from_spectrum([0.0, 1.0], [0.5, 0.5], [-1.0, 1.0], 3)
        devs = [freeprob.asymptotic_freeness_mc(model, p, mc_n, mc_samples, seed)["max_deviation"] for p in (1, 2, 3)]
        detail += f"; Monte-Carlo max deviation {max(devs):.2e} (tol 5e-2, n={mc_n}, {mc_samples} samples)"
        if max(devs) > 5e-2:
            fails.append({"property": "monte_carlo", "deviations": devs})
        informational = True
    return CriterionResult(10, "free probability", not fails, max(worst_rt, worst_mass), detail,
                           informational=informational, failures=fails)


# 11 --------------------------------------------------------------------
@_timed
def divergence_suite(orders=(3, 4), K: int = 20) -> CriterionResult:
    fails, parts = [], []
    for p in orders:
        rows = hadamard.direct_sum_divergence(p, K)
        for case in ("I", "II"):
            rs = [r for r in rows if r.case == case]
            pn = np.array([r.pnorm_partial for r in rs])
            tv = np.array([r.tv_partial for r in rs])
            inc = float(pn[-1] - pn[-2]) if len(pn) > 1 else 0.0
            grow = all(tv[k - 1] >= 0.9 * log(k) for k in range(10, K + 1))
            mono = bool(np.all(np.diff(pn) > 0))
            parts.append(f"p={p}/{case}: last p-norm increment {inc:.1e}, TV {tv[-1]:.3f} vs 0.9 ln K {0.9 * log(K):.3f}")
            if not (inc < 1e-3 and grow and mono):
                fails.append({"p": p, "case": case, "increment": inc, "tv": float(tv[-1])})
    return CriterionResult(11, "direct-sum divergence", not fails, 0.0, "; ".join(parts), failures=fails)


MANIFEST = {
    1: ("hadamard_total_variation", "n in {2,4,8,16}, p in {2,3,4}, n^p <= 1e8"),
    2: ("trace_formula", "50 seeded instances, 3 monomials, 3 resolvents, 2 exponentials, two remainder routes"),
    3: ("normalization_and_variation", "both densities of every criterion-2 instance"),
    4: ("route_equivalence", "first 2p+1 moments; L1 to the explicit order-2 formula"),
    5: ("koplienko_positivity", "100 seeded instances"),
    6: ("multimeasure_suite", "200 seeded cases plus a shared-eigenvalue instance"),
    7: ("divided_difference_suite", "500 seeded node lists, 20% with a confluent pair"),
    8: ("cauchy_suite", "50 instances x 5 nonreal points"),
    9: ("averaging_suite", "20 instances, 64 Gauss nodes, first order and p = 2, 3"),
    10: ("free_suite", "NC(p) for p <= 8, 50 round trips and free masses, optional Monte Carlo"),
    11: ("divergence_suite", "p in {3,4}, K = 20, cases I and II"),
}


def manifest_lines() -> list[str]:
    return [f"criterion {k:2d} -> {name}: {cases}" for k, (name, cases) in MANIFEST.items()]


def trace_suite(seed: int = 2024, count: int = 50, max_n: int = 6, orders=(1, 2, 3, 4), jobs=None,
                krein_trace_norm: bool = False) -> list[CriterionResult]:
    """Criteria 2, 3 and 4 share their instances and densities."""
    t = time.perf_counter()
    reports = analyse_all(random_instances(seed, count, max_n, orders), jobs)
    shared = time.perf_counter() - t
    out = [trace_formula(reports), normalization_and_variation(reports, krein_trace_norm), route_equivalence(reports)]
    out[0].elapsed += shared
    return out


def run_suite(seed: int = 0, max_n: int = 6, max_p: int = 4, jobs=None, mc: bool = False,
              krein_trace_norm: bool = True) -> list[CriterionResult]:
    """Every criterion once, seeds derived from ``seed``, sizes capped by
    ``max_n`` and orders by ``max_p``.

    The order-one variation bound is taken in the trace norm by default
    (``krein_trace_norm``), since the Hilbert-Schmidt bound does not hold
    for Krein's function.
    """
    if max_n < 1 or max_p < 1:
        raise ValueError("max_n and max_p must be positive")
    orders = tuple(range(1, min(max_p, 4) + 1))
    ps = tuple(p for p in (2, 3, 4) if p <= max_p) or (2,)
    results = [hadamard_total_variation((1, 2, 3, 4), ps)]
    results += trace_suite(seed + 2, 50, max_n, orders, jobs, krein_trace_norm)
    results.append(koplienko_positivity(seed + 5, 100, max(max_n, 1)))
    results.append(multimeasure_suite(seed + 6, 200, max(max_n, 2), max_p))
    results.append(divided_difference_suite(seed + 7, 500))
    results.append(cauchy_suite(seed + 8, 50, max_n, 5, tuple(p for p in (1, 2, 3) if p <= max_p), jobs))
    results.append(averaging_suite(seed + 9, 20, min(max_n, 4), 64, jobs))
    results.append(free_suite(seed + 10, 50, mc=mc))
    results.append(divergence_suite())
    return results
