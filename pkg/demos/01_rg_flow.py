"""Watch the tent law flow to its case-2 fixed point.

The tent density on [0, 1] has survival 2(1-x)^2 at the top, so its block
maxima, rescaled by x -> x^{n^{-1/2}}, approach M(x) = exp(-2 (-log x)^2).
The classifier reads (alpha, lambda) = (2, 2) off the tail alone.
"""

import math

import numpy as np

from rgevt import Case, FixedPoint, RescalingGroup, apply, classify, get_distribution

tent = get_distribution("tent")
verdict = classify(tent)
print(f"classifier: alpha = {verdict.alpha_hat:.6f}, lambda = {verdict.lambda_hat:.6f}")

group = RescalingGroup(Case.CASE2, 2)
M = FixedPoint(Case.CASE2, 2, 2).distribution()
x = np.linspace(0, 1, 1001)

print(f"\n{'n':>8}  {'max |T_s mu - M|':>18}  {'ratio to previous':>18}")
prev = None
for n in (10, 100, 1_000, 10_000, 100_000, 1_000_000):
    dev = float(np.max(np.abs(np.asarray(apply(group, math.log(n), tent).cdf(x)) - M.cdf(x))))
    ratio = "" if prev is None else f"{prev / dev:18.3f}"
    print(f"{n:>8}  {dev:18.3e}  {ratio}")
    prev = dev
# the deviation shrinks by sqrt(10) per decade: the leading perturbation is beta = 3, nu = n^{-1/2}
