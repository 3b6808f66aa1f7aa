"""The heaviest star in a cluster of n stars drawn from a Salpeter IMF.

Masses m^{-2.35} on [10, 200] solar masses are mapped to x = (m - 10)/190.
The top of the support carries a nonzero density, so the limit is the
alpha = 1 law exp(-lambda (-log x)) = x^lambda, and the first correction is
of order 1/n with the shape log x (log x + 2/lambda).
"""

import math

import numpy as np

from rgevt import Case, FixedPoint, RescalingGroup, apply, classify, extract_expansion, get_distribution

sal = get_distribution("salpeter")
v = classify(sal)
lam = v.lambda_hat
print(f"classifier: alpha = {v.alpha_hat:.6f}, lambda = {lam:.9f}")

exp = extract_expansion(sal, FixedPoint(Case.CASE2, 1, lam), 6)
c2 = -exp.coefficient(2)
print(f"first correction amplitude c2 = {c2:.7f}")

x = np.linspace(0.1, 0.9, 5)
L = np.log(x)
group = RescalingGroup(Case.CASE2, 1)
print(f"\n{'x':>5}  {'exact n=1e4':>12}  {'with 1/n term':>13}  {'limit only':>12}")
n = 1e4
exact = apply(group, math.log(n), sal).pdf(x)
for xi, e, Li in zip(x, exact, L):
    corr = lam * xi ** (lam - 1) * (1 - c2 / n * Li * (Li + 2 / lam))
    print(f"{xi:5.2f}  {e:12.8f}  {corr:13.8f}  {lam * xi ** (lam - 1):12.8f}")
