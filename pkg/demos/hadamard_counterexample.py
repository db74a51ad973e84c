"""Total variation of the Hadamard multimeasure and the direct-sum series.

Run:  python demos/hadamard_counterexample.py [outdir]
"""
import sys
from pathlib import Path

from specshift.hadamard import direct_sum_divergence, hadamard_tv, series_csv
from specshift.svgplot import write_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

print("  n  p        TV   n^(p/2)   TV/||V||_2^p")
for p in (2, 3, 4):
    for k in (1, 2, 3, 4):
        n = 2**k
        if n**p > 1e8:
            continue
        r = hadamard_tv(k, p)
        # ||V_n||_2^p = n^{p/2}, so the ratio is one: the bound is attained
        print(f"{n:3d} {p:2d} {r['tv']:9.3f} {r['predicted']:9.3f} {r['tv'] / n ** (p / 2):14.12f}")

print()
print("Blocks t_k V_{n(k)}: p-norm series converges, total-variation series grows like ln K.")
for p in (3, 4):
    rows = direct_sum_divergence(p, 40)
    (out / f"divergence_p{p}.csv").write_text(series_csv(rows))
    case1 = [r for r in rows if r.case == "I"]
    for K in (5, 10, 20, 40):
        r = case1[K - 1]
        print(f"  p={p} K={K:2d}  p-norm {r.pnorm_partial:.6f}   variation {r.tv_partial:.4f}")
    write_svg(out / f"divergence_p{p}.svg",
              [("p-norm", [r.K for r in case1], [r.pnorm_partial for r in case1]),
               ("variation", [r.K for r in case1], [r.tv_partial for r in case1])],
              title=f"partial sums, p={p}", xlabel="K", ylabel="partial sum")
