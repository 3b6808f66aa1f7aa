"""Finite-size corrections for the tent and valley laws.

Tail expansions around the fixed point give the L1 amplitude
Delta(n) = sum_k c_k n^{-p_k}.  The table compares the prediction with the
exact L1 distance of the transformed law, and shows how the third constant
changes when the zero of the leading correction is frozen instead of
followed to second order.
"""

import math

from rgevt import (
    Case,
    FixedPoint,
    RescalingGroup,
    analytic_expansion,
    apply,
    get_distribution,
    l1_distance,
    predict_corrections,
)

for name, alpha, order in (("tent", 2, 1.5), ("valley", 1, 3)):
    dist = get_distribution(name)
    fp = FixedPoint(Case.CASE2, alpha, 2)
    exp = analytic_expansion(dist, fp, 8)
    full = predict_corrections(exp, order)
    frozen = predict_corrections(exp, order, method="frozen")
    tail = " ".join(f"{c:+.4g} u^{float(b):g}" for b, c in exp.terms[:3])
    print(f"\n{name}: mu ~ M (1 {tail} ...)")
    for p, c, cf in zip(full.amp_exponents, full.amp_coeffs, frozen.amp_coeffs):
        print(f"  c_{p}: {c: .7f}   (frozen zero: {cf: .7f})")
    print(f"  {'n':>7}  {'exact Delta':>13}  {'predicted':>13}  {'residual':>10}")
    m = fp.distribution()
    group = RescalingGroup(Case.CASE2, alpha)
    for n in (1e2, 1e3, 1e4):
        exact = l1_distance(apply(group, math.log(n), dist), m, tol=1e-11)
        pred = full.amplitude(n)
        print(f"  {n:>7.0f}  {exact:13.9f}  {pred:13.9f}  {exact - pred:10.2e}")
