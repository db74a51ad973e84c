"""Spectral shift densities of orders 1 to 4 for a random 4x4 pair.

Run:  python demos/shift_functions.py [outdir]

Prints the mass and L1 norm of each density next to the values they must
match, checks the trace formula for a resolvent, and writes one SVG per
order with both routes overlaid.
"""
import sys
from math import factorial
from pathlib import Path

import numpy as np

from specshift.functions import fz
from specshift.herm import hs_norm, random_hermitian
from specshift.ssf import eta_recursive, eta_spline_rep, l1_distance
from specshift.svgplot import write_svg
from specshift.taylor import remainder_resolvent_closed

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

rng = np.random.default_rng(3)
h0 = random_hermitian(4, rng)
v = random_hermitian(4, rng, 0.6)
print("eigenvalues of H0     ", np.round(np.linalg.eigvalsh(h0), 4))
print("eigenvalues of H0 + V ", np.round(np.linalg.eigvalsh(h0 + v), 4))
print()

z = 0.3 + 1.2j
print(" p    int eta    tr(V^p)/p!   int|eta|   ||V||_2^p/p!   L1(rec - spl)   trace formula err")
for p in range(1, 5):
    rec = eta_recursive(h0, v, p)
    spl = eta_spline_rep(h0, v, p)
    mass = np.trace(np.linalg.matrix_power(v, p)).real / factorial(p)
    lhs = np.trace(remainder_resolvent_closed(h0, v, p, z))
    err = abs(rec.pair(fz(z)) - lhs) / abs(lhs)
    print(f"{p:2d} {rec.integral():11.6f} {mass:12.6f} {rec.abs_integral():10.6f} "
          f"{hs_norm(v) ** p / factorial(p):14.6f} {l1_distance(rec, spl):15.2e} {err:19.2e}")
    series = []
    for name, sf in (("recursive", rec), ("spline", spl)):
        t, y = sf.density.sample(500)
        series.append((name, t, np.real(y)))
    write_svg(out / f"eta_{p}.svg", series, title=f"order {p}", xlabel="t", ylabel=f"eta_{p}(t)")

# at order one the Hilbert-Schmidt column is not a bound; the trace norm is
print()
print("order 1: int|xi| =", round(eta_recursive(h0, v, 1).abs_integral(), 6),
      " trace norm of V =", round(float(np.abs(np.linalg.eigvalsh(v)).sum()), 6))
print("plots in", out.resolve())
