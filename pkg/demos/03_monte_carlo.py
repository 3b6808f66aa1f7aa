"""Monte Carlo block maxima of the tent law against the predicted corrections.

Draws N rescaled maxima per block size, bins them in 50 bins and compares
the sign-matched L1 estimate with c_{1/2} + c_1 n^{-1/2}.  The plug-in
estimate sum |p_hat - q| is shown next to it: its noise floor grows with n
because the signal shrinks while the binomial noise does not.
"""

import sys

import numpy as np

from rgevt import Case, FixedPoint, analytic_expansion, get_distribution, predict_corrections
from rgevt.montecarlo import ExperimentConfig, bin_masses, compare, histogram_l1, run_experiment, signed_l1

N = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
fp = FixedPoint(Case.CASE2, 2, 2)
M = fp.distribution()
series = predict_corrections(analytic_expansion(get_distribution("tent"), fp, 8), 1)

print(f"N = {N} maxima per block size\n")
print(f"{'n':>6}  {'signed':>8}  {'+-':>6}  {'plug-in':>8}  {'predicted':>9}  {'bins |z|<=3':>11}")
for seed, n in enumerate((100, 300, 1000, 3000)):
    r = run_experiment(ExperimentConfig("tent", n=n, replicas=N, seed=seed, group="case2:alpha=2"))
    q = bin_masses(M, r.bin_edges)
    signs = bin_masses(series.distribution(n), r.bin_edges) - q
    est = signed_l1(r, M, signs)
    plug = histogram_l1(r, M)
    pred = series.amplitude(n) * n**0.5
    inside = int(np.sum(np.abs(compare(r, series.distribution(n)).z) <= 3))
    print(f"{n:>6}  {est.value * n**0.5:8.4f}  {est.std_error * n**0.5:6.4f}  "
          f"{plug.value * n**0.5:8.4f}  {pred:9.4f}  {inside:>8}/50")
