"""Command-line front end.

Exit codes: 0 when every check passes, 1 when some residual exceeds its
tolerance, 2 on bad input or arguments.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from math import factorial
from pathlib import Path

import numpy as np

from . import battery, freeprob, hadamard
from .functions import Exponential, Polynomial, ResolventPower
from .herm import HermitianError, hermitian, hs_norm, random_hermitian
from .multimeasure import SizeError
from .ssf import (
    default_functions,
    eta_recursive,
    eta_spline_rep,
    l1_distance,
    spectral_average_first,
    spectral_average_higher,
    spline_density,
    verify_trace_formula,
)
from .svgplot import write_svg

PROBLEM_HERMITIAN_TOL = 1e-10
ALGEBRAIC_TOL = 1e-9


class InputError(ValueError):
    """Anything wrong with user input; maps to exit code 2."""


# problem files ---------------------------------------------------------
def _matrix(entries, n, name):
    try:
        a = np.array([[complex(re, im) for re, im in row] for row in entries], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: entries must be [re, im] pairs") from exc
    if a.shape != (n, n):
        raise InputError(f"{name}: expected {n}x{n}, got shape {a.shape}")
    return a


def _generator_spec(gen):
    spec = gen.get("random_hermitian", gen)
    try:
        n = int(spec["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("generator needs an integer n") from exc
    if n < 1:
        raise InputError("generator n must be positive")
    return n, float(spec.get("scale_h0", 1.0)), float(spec.get("scale_v", 1.0))


def parse_problem(path, seed: int = 0):
    """Read a problem file and return ``(h0, v)``.

    Either explicit matrices ``h0``/``v`` as rows of ``[re, im]`` pairs, or a
    ``generator`` block expanded from the file's ``seed`` (else ``seed``).
    """
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    if "generator" in doc:
        n, s0, s1 = _generator_spec(doc["generator"])
        rng = np.random.default_rng(int(doc.get("seed", seed)))
        return random_hermitian(n, rng, s0), random_hermitian(n, rng, s1)
    try:
        n = int(doc["n"])
        raw_h0, raw_v = doc["h0"], doc["v"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: needs n, h0 and v (or a generator)") from exc
    h0, v = _matrix(raw_h0, n, "h0"), _matrix(raw_v, n, "v")
    try:
        return hermitian(h0, PROBLEM_HERMITIAN_TOL), hermitian(v, PROBLEM_HERMITIAN_TOL)
    except HermitianError as exc:
        raise InputError(str(exc)) from exc


# output helpers --------------------------------------------------------
def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _retol(rows, tol):
    return rows if tol is None else [dataclasses.replace(r, tol=tol) for r in rows]


def _plot_eta(path, etas: dict, p: int):
    series = []
    for name, sf in etas.items():
        t, y = sf.density.sample(600)
        series.append((name, t, np.real(y)))
    write_svg(path, series, title=f"spectral shift density, order {p}", xlabel="t", ylabel=f"eta_{p}(t)")


def _order(args):
    if args.order < 1:
        raise InputError("--order must be at least 1")
    return args.order


# commands --------------------------------------------------------------
def cmd_compute(args) -> int:
    h0, v = parse_problem(args.input, args.seed)
    p = _order(args)
    routes = ["recursive", "spline"] if args.route == "both" else [args.route]
    build = {"recursive": eta_recursive, "spline": eta_spline_rep}
    etas = {r: build[r](h0, v, p) for r in routes}
    target = float(np.trace(np.linalg.matrix_power(v, p)).real) / factorial(p)
    tol = args.tol or ALGEBRAIC_TOL
    out = {"order": p, "n": int(h0.shape[0]), "trace_vp_over_pfact": target, "routes": {}}
    ok = True
    for r, sf in etas.items():
        err = abs(sf.integral() - target)
        ok &= err <= tol
        out["routes"][r] = {**sf.to_dict(), "integral": sf.integral(), "abs_integral": sf.abs_integral(),
                            "normalization_err": err}
    if len(etas) == 2:
        dist = l1_distance(etas["recursive"], etas["spline"])
        out["l1_between_routes"] = dist
        ok &= dist <= tol * max(1.0, hs_norm(v) ** p)
    out["pass"] = bool(ok)
    _emit(_dump(out), args.output)
    if args.plot:
        _plot_eta(args.plot, etas, p)
    return 0 if ok else 1


def _select_functions(p, names):
    kinds = {"monomial": Polynomial, "resolvent": ResolventPower, "exp": Exponential}
    wanted = [s.strip() for s in names.split(",") if s.strip()]
    bad = [w for w in wanted if w not in kinds]
    if bad:
        raise InputError(f"unknown function family: {', '.join(bad)}")
    return [f for f in default_functions(p) if any(isinstance(f, kinds[w]) for w in wanted)]


def cmd_verify(args) -> int:
    h0, v = parse_problem(args.input, args.seed)
    p = _order(args)
    f_set = _select_functions(p, args.functions)
    etas = {"recursive": eta_recursive(h0, v, p), "spline": eta_spline_rep(h0, v, p)}
    rows, cross = verify_trace_formula(h0, v, p, f_set, etas=etas)
    rows, cross = _retol(rows, args.tol), _retol(cross, args.tol)
    report = {"order": p, "rows": [r.to_dict() for r in rows], "route_checks": [r.to_dict() for r in cross]}
    ok = all(r.passed for r in rows + cross)
    report["pass"] = ok
    _emit(_dump(report), args.output)
    if args.plot:
        _plot_eta(args.plot, etas, p)
    return 0 if ok else 1


def cmd_counterexample(args) -> int:
    if not 1 <= args.log2n <= 4 or not 2 <= args.order <= 4:
        raise InputError("--log2n must lie in 1..4 and --order in 2..4")
    res = hadamard.hadamard_tv(args.log2n, args.order)
    tol = args.tol or ALGEBRAIC_TOL
    res["rel_err"] = abs(res["tv"] - res["predicted"]) / res["predicted"]
    res["pass"] = res["rel_err"] <= tol
    _emit(_dump(res), args.output)
    if args.plot:
        ks = [k for k in range(1, args.log2n + 1) if float(2**k) ** args.order <= 1e8]
        tvs = [hadamard.hadamard_tv(k, args.order)["tv"] for k in ks]
        ns = [2.0**k for k in ks]
        write_svg(args.plot, [("computed", ns, tvs), ("n^(p/2)", ns, [n ** (args.order / 2) for n in ns])],
                  title=f"total variation of the Hadamard multimeasure, p={args.order}", xlabel="n", ylabel="TV")
    return 0 if res["pass"] else 1


def cmd_divergence(args) -> int:
    if args.order < 3 or not 1 <= args.terms <= 40:
        raise InputError("--order must be >= 3 and --terms in 1..40")
    rows = hadamard.direct_sum_divergence(args.order, args.terms)
    _emit(hadamard.series_csv(rows), args.output)
    if args.plot:
        series = []
        for case in ("I", "II"):
            rs = [r for r in rows if r.case == case]
            K = [r.K for r in rs]
            series += [(f"p-norm ({case})", K, [r.pnorm_partial for r in rs]),
                       (f"variation ({case})", K, [r.tv_partial for r in rs])]
        write_svg(args.plot, series, title=f"partial sums, p={args.order}", xlabel="K", ylabel="partial sum")
    return 0


def cmd_free(args) -> int:
    try:
        model = freeprob.FreeModel.from_json(Path(args.model).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {args.model}: {exc.strerror}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.model}: invalid model ({exc})") from exc
    p = _order(args)
    m = freeprob.free_multimeasure(model, p)
    rows = _retol(freeprob.free_mass_rows(model, p), args.tol)
    out = {"order": p, "model": model.to_dict(), "measure": m.to_dict(), "rows": [r.to_dict() for r in rows],
           "cumulant_weight_sum": freeprob.cumulant_weight_sum(model, p)}
    ok = all(r.passed for r in rows)
    if args.mc:
        try:
            n, samples = (int(s) for s in args.mc.split(","))
        except ValueError as exc:
            raise InputError("--mc expects n,samples") from exc
        if model.v_spectrum is None:
            raise InputError("--mc needs v_spectrum in the model")
        # informational: reported, not part of the exit status
        out["monte_carlo"] = freeprob.asymptotic_freeness_mc(model, p, n, samples, args.seed)
    out["pass"] = ok
    _emit(_dump(out), args.output)
    if args.plot:
        pp, _ = spline_density(m)
        t, y = pp.sample(600)
        write_svg(args.plot, [("free density", t, np.real(y))], title=f"free spline density, order {p}",
                  xlabel="t", ylabel="density")
    return 0 if ok else 1


def cmd_average(args) -> int:
    h0, v = parse_problem(args.input, args.seed)
    p = _order(args)
    if args.quad < 2:
        raise InputError("--quad must be at least 2")
    rows = spectral_average_first(h0, v, quad_nodes=args.quad)
    eta = None
    if p >= 2:
        eta = eta_recursive(h0, v, p)
        rows += spectral_average_higher(h0, v, p, quad_nodes=args.quad, eta=eta)
    rows = _retol(rows, args.tol)
    ok = all(r.passed for r in rows)
    _emit(_dump({"order": p, "quad": args.quad, "rows": [r.to_dict() for r in rows], "pass": ok}), args.output)
    if args.plot:
        _plot_eta(args.plot, {"recursive": eta or eta_recursive(h0, v, p)}, p)
    return 0 if ok else 1


def cmd_suite(args) -> int:
    print("criterion-to-case manifest:")
    for line in battery.manifest_lines():
        print("  " + line)
    results = battery.run_suite(args.seed, args.max_n, args.max_p, args.jobs, mc=args.mc)
    for r in results:
        print(r.line())
    ok = all(r.ok for r in results)
    if args.output:
        rows = []
        for r in results:
            d = r.to_dict()
            d.pop("elapsed")
            rows.append(d)
        Path(args.output).write_text(_dump({"seed": args.seed, "max_n": args.max_n, "max_p": args.max_p,
                                            "criteria": rows, "pass": ok}))
    if args.plot:
        names = [f"c{r.number}" for r in results]
        worst = [np.log10(max(r.worst, 1e-17)) for r in results]
        write_svg(args.plot, [("log10 worst residual", list(range(1, len(names) + 1)), worst)],
                  title="suite residuals by criterion", xlabel="criterion", ylabel="log10 residual")
    print("suite", "PASS" if ok else "FAIL")
    return 0 if ok else 1


# parser ----------------------------------------------------------------
def _default_seed() -> int:
    raw = os.environ.get("SPECSHIFT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--plot", metavar="FILE.svg", help="write a sampled curve as SVG")
    common.add_argument("--seed", type=int, default=_default_seed(), help="default: $SPECSHIFT_SEED or 0")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--tol", type=float, help="override the residual tolerance")

    parser = argparse.ArgumentParser(prog="specshift", description="Higher-order spectral shift computations.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="compute eta_p for a problem file")
    c.add_argument("--input", required=True)
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--route", choices=["recursive", "spline", "both"], default="both")
    c.set_defaults(func=cmd_compute)

    c = sub.add_parser("verify", parents=[common], help="check the trace formula on a problem file")
    c.add_argument("--input", required=True)
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--functions", default="monomial,resolvent,exp")
    c.set_defaults(func=cmd_verify)

    c = sub.add_parser("counterexample", parents=[common], help="total variation of the Hadamard multimeasure")
    c.add_argument("--log2n", type=int, required=True)
    c.add_argument("--order", type=int, required=True)
    c.set_defaults(func=cmd_counterexample)

    c = sub.add_parser("divergence", parents=[common], help="direct-sum partial sums as CSV")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--terms", type=int, required=True)
    c.set_defaults(func=cmd_divergence)

    c = sub.add_parser("free", parents=[common], help="free multimeasure of a model file")
    c.add_argument("--model", required=True)
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--mc", metavar="N,SAMPLES", help="Monte-Carlo comparison with random rotations")
    c.set_defaults(func=cmd_free)

    c = sub.add_parser("average", parents=[common], help="spectral averaging identities")
    c.add_argument("--input", required=True)
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--quad", type=int, default=64)
    c.set_defaults(func=cmd_average)

    c = sub.add_parser("suite", parents=[common], help="run the whole property battery")
    c.add_argument("--max-n", type=int, default=6)
    c.add_argument("--max-p", type=int, default=4)
    c.add_argument("--mc", action="store_true", help="include the Monte-Carlo freeness check")
    c.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SizeError, ValueError) as exc:
        print(f"specshift {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
