"""Acceptance criteria AC1 to AC12.

Each test records one ``AC<k> PASS|FAIL <detail>`` line, printed immediately
and again in the terminal summary, then asserts the criterion as stated.
"""

import math

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from rgevt import (
    Case,
    FixedPoint,
    RescalingGroup,
    analytic_expansion,
    apply,
    classify,
    extract_expansion,
    fixed_point_residual,
    get_distribution,
    l1_distance,
    predict_corrections,
    rescale,
)
from rgevt.cli import parse_and_dispatch
from rgevt.montecarlo import ExperimentConfig, bin_masses, compare, histogram_l1, run_experiment, signed_l1
from rgevt.rescaling import check_group_law

TENT_FP = FixedPoint(Case.CASE2, 2, 2)
VALLEY_FP = FixedPoint(Case.CASE2, 1, 2)
MC_REPLICAS = 1_000_000
MC_BINS = 50


def report(ac, ok, detail):
    line = f"AC{ac} {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


GRIDS = {
    Case.CASE0: np.linspace(-3, 6, 100),
    Case.CASE1_MINUS: np.linspace(-4, 0, 100),
    Case.CASE1_PLUS: np.linspace(0, 6, 100),
    Case.CASE2: np.linspace(0, 1, 100),
}


def _tent_series(order=1.5):
    return predict_corrections(analytic_expansion(get_distribution("tent"), TENT_FP, 8), order)


def _valley_series(order=3):
    return predict_corrections(analytic_expansion(get_distribution("valley"), VALLEY_FP, 8), order)


# ---------------------------------------------------------------- AC1-AC3

def test_ac1_fixed_point_identities():
    worst = 0.0
    for case in Case:
        for alpha in (0.5, 1, 2):
            for lam in (0.5, 1, 3):
                for s in (0.5, 1, 3):
                    worst = max(worst, fixed_point_residual(FixedPoint(case, alpha, lam), s, GRIDS[case]))
    ok = worst <= 1e-12
    report(1, ok, f"max fixed-point residual {worst:.2e} (<= 1e-12), 4 cases x 9 (alpha, lambda) x 3 s")
    assert ok


def test_ac2_group_laws():
    worst = 0.0
    for case in Case:
        g = RescalingGroup(case, 1.7)
        for s1, s2 in [(0.5, 1.0), (1.0, 3.0), (-2.0, 0.7), (2.5, -1.0)]:
            worst = max(worst, check_group_law(g, s1, s2, GRIDS[case]))
        for s in (0.5, 1.0, 3.0):
            # inverse pairs: g_{-s} o g_s is the identity
            back = rescale(g, -s, rescale(g, s, GRIDS[case]))
            worst = max(worst, float(np.max(np.abs(back - GRIDS[case]))))
            worst = max(worst, check_group_law(g, s, -s, GRIDS[case]))
    ok = worst <= 1e-12
    report(2, ok, f"max group-law deviation {worst:.2e} (<= 1e-12) on 100-point grids, inverse pairs included")
    assert ok


def test_ac3_tent_converges_to_fixed_point():
    tent = get_distribution("tent")
    group = RescalingGroup(Case.CASE2, 2)
    x = np.linspace(0, 1, 1001)
    m = np.asarray(TENT_FP.distribution().cdf(x), float)
    devs = []
    for n in (1e2, 1e3, 1e4, 1e5):
        t = apply(group, math.log(n), tent)
        devs.append(float(np.max(np.abs(np.asarray(t.cdf(x), float) - m))))
    ok = devs[-1] < 3e-3 and all(b < a for a, b in zip(devs, devs[1:]))
    report(3, ok, "max |T_s tent - M| at n=1e2..1e5: " + ", ".join(f"{d:.3e}" for d in devs)
           + " (last < 3e-3, decreasing)")
    assert ok


# ---------------------------------------------------------------- AC4-AC7

def test_ac4_classifier():
    targets = {"tent": (2, 2, 1e-3), "valley": (1, 2, 1e-3), "salpeter": (1, 0.0228741, 1e-4)}
    ok, parts = True, []
    for name, (a, lam, tol_lam) in targets.items():
        v = classify(get_distribution(name))
        good = v.converges and abs(v.alpha_hat - a) <= 1e-3 and abs(v.lambda_hat - lam) <= tol_lam
        ok &= good
        parts.append(f"{name} ({v.alpha_hat:.6f}, {v.lambda_hat:.7f})")
    report(4, ok, "; ".join(parts))
    assert ok


def test_ac5_numeric_extraction():
    cases = [("tent", TENT_FP, (3, 4, 5), (2, -19 / 6, 9 / 2)),
             ("valley", VALLEY_FP, (2, 3, 4), (1, 1, 7 / 12))]
    ok, worst = True, 0.0
    for name, fp, betas, expected in cases:
        exp = extract_expansion(get_distribution(name), fp, max(betas))
        for b, c in zip(betas, expected):
            err = abs(exp.coefficient(b) - c)
            worst = max(worst, err)
            ok &= err <= 1e-6
    report(5, ok, f"max coefficient error {worst:.2e} (<= 1e-6), tent beta=3..5, valley beta=2..4")
    assert ok


def test_ac6_amplitude_coefficients():
    printed = oracles.closed_forms()
    got = {"tent": _tent_series(1.5).amp_coeffs, "valley": _valley_series(3).amp_coeffs}
    labels = {"tent": ("c1/2", "c1", "c3/2"), "valley": ("c1", "c2", "c3")}
    ok, parts = True, []
    for name in ("tent", "valley"):
        for lab, c, ref in zip(labels[name], got[name], printed[name]):
            good = abs(c - ref) <= 1e-5
            ok &= good
            parts.append(f"{name} {lab} {c:.6f} vs {ref:.6f} {'ok' if good else 'MISMATCH'}")
    note = "" if ok else (" [the printed c3/2 and c3 coincide with the frozen-root approximation;"
                          " the full expansion and mpmath quadrature of the exact transform agree"
                          " with the values computed here, see README]")
    report(6, ok, "; ".join(parts) + note)
    assert ok


def test_ac7_oracle_residual_scaling():
    series = _tent_series(1.5)
    tent = get_distribution("tent")
    m = TENT_FP.distribution()
    group = RescalingGroup(Case.CASE2, 2)
    ns = np.array([1e2, 1e3, 1e4, 1e5])
    res = np.array([abs(l1_distance(apply(group, math.log(n), tent), m, tol=1e-12) - series.amplitude(n))
                    for n in ns])
    slope = float(np.polyfit(np.log(ns), np.log(res), 1)[0])
    ok = slope <= -1.9
    report(7, ok, f"log-log slope {slope:.3f} (<= -1.9); residuals " + ", ".join(f"{r:.2e}" for r in res))
    assert ok


# --------------------------------------------------------------- AC8-AC10

def _mc(dist_id, n, seed, group):
    cfg = ExperimentConfig(dist_id, n=n, replicas=MC_REPLICAS, bins=MC_BINS, seed=seed, group=group)
    return run_experiment(cfg)


def _amplitude_check(result, series, fp, n, power, omitted):
    """Scaled sign-matched amplitude, its target and the combined sd."""
    m = fp.distribution()
    q = bin_masses(m, result.bin_edges)
    offset = bin_masses(series.distribution(n), result.bin_edges) - q
    est = signed_l1(result, m, offset)
    plug = histogram_l1(result, m)
    scale = n**power
    target = sum(c * n ** -(float(p) - power) for p, c in zip(series.amp_exponents, series.amp_coeffs))
    sd = math.hypot(scale * est.std_error, omitted)
    return scale * est.value, target, sd, scale * plug.value


def test_ac8_tent_amplitude_monte_carlo():
    series = _tent_series(1)
    c32 = _tent_series(1.5).amp_coeffs[2]
    ok, parts = True, []
    for seed, n in enumerate((100, 300, 1000, 3000), start=101):
        r = _mc("tent", n, seed, "case2:alpha=2")
        val, target, sd, plug = _amplitude_check(r, series, TENT_FP, n, 0.5, abs(c32) / n)
        good = abs(val - target) <= 2 * sd
        ok &= good
        parts.append(f"n={n}: {val:.4f} vs {target:.4f} (sd {sd:.4f}, plug-in {plug:.4f})")
    report(8, ok, "sqrt(n) Delta_hat; " + "; ".join(parts))
    assert ok


def _shape_check(result, series, n):
    c = compare(result, series.distribution(n))
    inside = int(np.sum(np.abs(c.z) <= 3))
    return inside, c


def test_ac9_tent_shape_monte_carlo():
    n = 3000
    r = _mc("tent", n, 201, "case2:alpha=2")
    inside, c = _shape_check(r, _tent_series(1), n)
    ok = inside >= 45
    report(9, ok, f"{inside}/50 bins within 3 sigma (>= 45); max |z| {np.max(np.abs(c.z)):.2f}")
    assert ok


def test_ac10_valley_amplitude_and_shape_monte_carlo():
    n = 300
    series = _valley_series(2)
    c3 = _valley_series(3).amp_coeffs[2]
    r = _mc("valley", n, 301, "case2:alpha=1")
    val, target, sd, plug = _amplitude_check(r, series, VALLEY_FP, n, 1.0, abs(c3) / n**2)
    amp_ok = abs(val - target) <= 2 * sd
    inside, c = _shape_check(r, series, n)
    shape_ok = inside >= 45
    ok = amp_ok and shape_ok
    report(10, ok, f"n Delta_hat {val:.4f} vs {target:.4f} (sd {sd:.4f}, plug-in {plug:.4f}) "
                   f"{'ok' if amp_ok else 'MISMATCH'}; shape {inside}/50 bins within 3 sigma")
    assert ok


# -------------------------------------------------------------- AC11-AC12

def test_ac11_salpeter_correction():
    d = get_distribution("salpeter")
    lam = oracles.salpeter_constants()[2]
    fp = FixedPoint(Case.CASE2, 1, lam)
    exp = extract_expansion(d, fp, 6)
    c2 = -exp.coefficient(2)
    n = 1e4
    x = np.linspace(0.1, 0.9, 81)
    L = np.log(x)
    formula = lam * x ** (lam - 1) * (1 - (c2 / n) * L * (L + 2 / lam))
    exact = np.asarray(apply(RescalingGroup(Case.CASE2, 1), math.log(n), d).pdf(x), float)
    rel = float(np.max(np.abs(exact / formula - 1)))
    ok = abs(c2 - 0.0143578) <= 1e-4 and rel <= 5e-3
    report(11, ok, f"c2 {c2:.7f} (0.0143578 +- 1e-4); max relative density deviation {rel:.2e} (<= 5e-3)")
    assert ok


def test_ac12_determinism(tmp_path):
    outs = []
    for workers in (1, 4):
        out = tmp_path / f"w{workers}.csv"
        status, _ = parse_and_dispatch(["simulate", "--dist", "tent", "--n", "1000", "--replicas", "300000",
                                        "--seed", "12345", "--chunk-size", "50000",
                                        "--workers", str(workers), "--out", str(out)])
        assert status == 0
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1]
    report(12, ok, f"simulate CSVs with 1 and 4 workers byte-identical ({len(outs[0])} bytes)")
    assert ok
