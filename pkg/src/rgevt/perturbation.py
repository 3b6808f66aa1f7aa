"""Linearised RG around a compact-support fixed point and finite-size corrections.

Around ``M(x) = exp(-lam (-log x)**alpha)`` the differential of the RG acts
diagonally on ``M * phi_beta`` with ``phi_beta = (-log x)**beta`` and
eigenvalue ``n**(1 - beta/alpha)``.  A law in the basin is written

    mu(x) = M(x) * (1 + sum_i c_i (-log x)**beta_i),    beta_i > alpha,

and the exact identity

    T_s mu(x) = M(x) * exp(n * log(1 + sum_i c_i n**(-beta_i/alpha) u**beta_i))

with ``u = -log x`` is expanded as a formal series in ``t = n**(-step/alpha)``.
Shape corrections are derivatives ``d/dx [M(x) Q_k(u)]``; the L1 amplitude is
expanded by following the extrema of ``M * sum_k t**k Q_k`` (the zeros of the
density correction) as perturbed roots.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .distributions import Case, Distribution, FixedPoint, _arr, _ret
from .engine import _pow_from_log
from .errors import BasinError, ExtractionError, ParameterError, TruncationError
from .rescaling import rescale
from .series import BiSeries, GenPoly, TSeries, as_fraction, fraction_gcd

__all__ = [
    "PerturbationExpansion",
    "CorrectionSeries",
    "differential_apply",
    "eigenvalue",
    "eigenfunction",
    "extract_expansion",
    "analytic_expansion",
    "analytic_coefficients",
    "predict_corrections",
    "shape_correction",
]

DISCARD_BELOW = 1e-9


@dataclass(frozen=True)
class PerturbationExpansion:
    """``mu = M (1 + sum c_i phi_{beta_i})`` truncated at degree ``truncation_order``."""

    fixed_point: FixedPoint
    terms: tuple
    truncation_order: float

    def __post_init__(self):
        terms = tuple(sorted((float(b), float(c)) for b, c in self.terms))
        object.__setattr__(self, "terms", terms)

    @property
    def betas(self):
        return tuple(b for b, _ in self.terms)

    @property
    def coefficients(self):
        return tuple(c for _, c in self.terms)

    def coefficient(self, beta):
        for b, c in self.terms:
            if abs(b - beta) < 1e-12:
                return c
        return 0.0

    @property
    def is_stable(self):
        return all(b > self.fixed_point.alpha for b in self.betas)


@dataclass(frozen=True)
class CorrectionSeries:
    """Finite-size corrections ``delta(x, n)`` and ``Delta(n)`` as series in ``n``.

    ``exponents[k]`` is the power ``p`` of ``n**-p`` multiplying the shape
    term ``delta_coeff(k, x)``.  ``amp_exponents``/``amp_coeffs`` give the L1
    amplitude ``Delta(n) = sum amp_coeffs[k] * n**-amp_exponents[k]``.
    """

    fixed_point: FixedPoint
    exponents: tuple
    cdf_polys: tuple = field(repr=False)
    amp_exponents: tuple
    amp_coeffs: tuple
    extrema: tuple = ()

    def delta_coeff(self, k, x):
        """Shape term ``d/dx [M(x) Q_k(-log x)]``."""
        fp = self.fixed_point
        x = _arr(x).astype(float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u = -np.log(x)
            r = _density_poly(self.cdf_polys[k], fp)
            out = -np.exp(-fp.lam * u ** fp.alpha) * r(u) / x
        return _ret(np.where(np.isfinite(out), out, 0.0))

    @property
    def delta_coeffs(self):
        return [lambda x, k=k: self.delta_coeff(k, x) for k in range(len(self.exponents))]

    def cdf_coeff(self, k, x):
        """CDF correction term ``M(x) Q_k(-log x)``."""
        fp = self.fixed_point
        x = _arr(x).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = -np.log(x)
            out = np.exp(-fp.lam * u ** fp.alpha) * self.cdf_polys[k](u)
        return _ret(np.where(np.isfinite(out), out, 0.0))

    def shape(self, n, x, upto=None):
        return shape_correction(self, n, x, upto)

    def amplitude(self, n, upto=None):
        upto = len(self.amp_coeffs) if upto is None else upto
        return sum(c * n ** -float(p)
                   for p, c in zip(self.amp_exponents[:upto], self.amp_coeffs[:upto]))

    def density(self, n, upto=None):
        """Predicted density ``M' + delta`` as a callable of ``x``."""
        dens = self.fixed_point.distribution()
        return lambda x: np.asarray(dens.pdf(x)) + np.asarray(self.shape(n, x, upto))

    def cdf(self, n, x, upto=None):
        """Predicted CDF ``M + sum_k M Q_k n**-p_k``."""
        upto = len(self.exponents) if upto is None else upto
        x = _arr(x)
        total = np.asarray(self.fixed_point.cdf(x), dtype=float)
        for k in range(upto):
            total = total + np.asarray(self.cdf_coeff(k, x)) * n ** -float(self.exponents[k])
        return _ret(total)

    def distribution(self, n, upto=None):
        """The truncated prediction at block size ``n`` as a :class:`Distribution`.

        Its CDF is not guaranteed monotone far from the asymptotic regime;
        it is meant for bin averages and plots, not for sampling.
        """
        return Distribution(
            cdf=lambda x: self.cdf(n, x, upto),
            pdf=self.density(n, upto),
            support=self.fixed_point.support,
            name=f"prediction(n={n:g}, orders={len(self.exponents) if upto is None else upto})",
        )


def _density_poly(q, fp):
    """``R = dQ/du - lam alpha u**(alpha-1) Q``, so that d/du[M Q] = M R."""
    alpha = as_fraction(fp.alpha)
    return q.derivative() - q.shift(alpha - 1).scale(fp.lam * fp.alpha)


# ------------------------------------------------------------- linear RG

def _require_case2(fp):
    if fp.case is not Case.CASE2:
        raise ParameterError("perturbation theory is implemented for case2 fixed points only")


def eigenvalue(beta, alpha, n):
    """``n**(1 - beta/alpha)``."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    return n ** (1.0 - beta / alpha)


def eigenfunction(fp, beta):
    """``x -> M(x) (-log x)**beta``."""
    m = fp.distribution()

    def eta(x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(m.cdf(x)) * (-np.log(x)) ** beta
        return _ret(np.where(np.isfinite(out), out, 0.0))

    return eta


def differential_apply(fp, s, eta):
    """``(DT_s)_M eta = x -> n M(g_s x)**(n-1) eta(g_s x)``."""
    n = math.exp(s)
    m = fp.distribution()
    group = fp.group()

    def out(x):
        g = rescale(group, s, x)
        return _ret(n * _pow_from_log(np.asarray(m.logcdf(g)), n - 1) * np.asarray(eta(g)))

    return out


# ------------------------------------------------------------- extraction

def _vandermonde_inverse(D):
    """Exact inverse of ``V[j, k] = (j+1)**(k+1)`` (j, k < D)."""
    a = [[Fraction((j + 1) ** (k + 1)) for k in range(D)] for j in range(D)]
    inv = [[Fraction(int(i == j)) for j in range(D)] for i in range(D)]
    for col in range(D):
        piv = next(r for r in range(col, D) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        inv[col] = [v / p for v in inv[col]]
        for r in range(D):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
                inv[r] = [v - f * w for v, w in zip(inv[r], inv[col])]
    ld = np.longdouble
    return np.array([[ld(v.numerator) / ld(v.denominator) for v in row] for row in inv])


def _ratio_function(dist, fp):
    """``h(u) = mu(e^-u) / M(e^-u) - 1`` in extended precision."""
    lam, alpha = fp.lam, fp.alpha

    def h(u):
        u = np.asarray(u, dtype=np.longdouble)
        x = np.exp(-u)
        return np.expm1(np.asarray(dist.logcdf(x), dtype=np.longdouble) + lam * u ** alpha)

    return h


def _stencil_coeffs(h, step, D, vinv):
    nodes = np.arange(1, D + 1, dtype=np.longdouble) * np.longdouble(step)
    b = vinv @ h(nodes)
    return b / np.longdouble(step) ** np.arange(1, D + 1)


def extract_expansion(dist, fp, max_order, levels=6, tol=1e-6):
    """Integer-``beta`` coefficients of ``mu/M - 1`` as a series in ``u = -log x``.

    One-sided polynomial stencils on ``u = j*step`` (``j = 1..D``) are solved
    exactly, the step is halved ``levels - 1`` times and the estimates are
    Richardson-extrapolated; the table entry with the smallest error
    estimate is kept.  Coefficients below 1e-9 in magnitude are discarded.
    Accuracy degrades with the degree (roughly 1e-10 at degree 3 and a few
    1e-6 at degree 6 for the tent law) because each extra derivative costs
    a power of the step.

    Raises
    ------
    ExtractionError
        If some coefficient does not settle to within ``tol``.
    BasinError
        If a retained term has ``beta <= alpha``.
    """
    _require_case2(fp)
    if dist.support != fp.support:
        raise ParameterError("extraction needs a law on [0, 1]")
    max_order = int(max_order)
    D = max_order + 3
    u_max = 0.5
    for k in dist.kinks:
        if 0 < k < 1:
            u_max = min(u_max, 0.9 * -math.log(k))
    step0 = u_max / D
    vinv = _vandermonde_inverse(D)
    h = _ratio_function(dist, fp)

    tables = [_stencil_coeffs(h, step0 / 2 ** i, D, vinv) for i in range(levels)]
    terms, diagnostics = [], {}
    for k in range(1, max_order + 1):
        rows, best_err, best = [], np.inf, None
        for i in range(levels):
            row = [tables[i][k - 1]]
            for m in range(1, i + 1):
                p = D + m - k
                row.append(row[m - 1] + (row[m - 1] - rows[i - 1][m - 1]) / (2 ** p - 1))
                err = max(abs(row[m] - row[m - 1]), abs(row[m] - rows[i - 1][m - 1]))
                if err < best_err:
                    best_err, best = float(err), float(row[m])
            rows.append(row)
        diagnostics[k] = {"estimate": best, "error": best_err}
        if not best_err <= tol * max(1.0, abs(best)):
            raise ExtractionError(
                f"coefficient of (-log x)^{k} did not converge "
                f"(estimate {best:.6g}, error {best_err:.2e})",
                diagnostics=diagnostics,
            )
        if abs(best) > DISCARD_BELOW:
            terms.append((k, best))
    _check_basin(terms, fp)
    return PerturbationExpansion(fp, tuple(terms), max_order)


def _check_basin(terms, fp):
    bad = [(b, c) for b, c in terms if b <= fp.alpha]
    if bad:
        b, c = bad[0]
        kind = "marginal" if math.isclose(b, fp.alpha) else "relevant"
        raise BasinError(
            f"{kind} perturbation beta={b:g} (coefficient {c:.3g}) for alpha={fp.alpha:g}: "
            "the law is not in the basin of this fixed point"
        )


def analytic_expansion(dist, fp, max_order):
    """Exact rational expansion for laws whose CDF is polynomial near x = 1.

    Needs ``dist.upper_poly``, an integer ``alpha`` and a rational ``lam``.
    Returns a :class:`PerturbationExpansion` with float coefficients; the
    exact rationals come from :func:`analytic_coefficients`.
    """
    exact = analytic_coefficients(dist, fp, max_order)
    terms = [(k, float(c)) for k, c in exact.items() if c != 0]
    _check_basin(terms, fp)
    return PerturbationExpansion(fp, tuple(terms), max_order)


def analytic_coefficients(dist, fp, max_order):
    """``{beta: Fraction}`` Taylor coefficients of ``mu/M - 1`` in ``u``."""
    _require_case2(fp)
    if dist.upper_poly is None:
        raise ParameterError(f"{dist.name} has no polynomial CDF near x = 1")
    if not float(fp.alpha).is_integer():
        raise ParameterError("analytic expansion needs an integer alpha")
    alpha = int(fp.alpha)
    lam = Fraction(fp.lam).limit_denominator(10**6)
    if float(lam) != fp.lam:
        raise ParameterError("analytic expansion needs a rational lambda")
    K = int(max_order)
    # mu(e^-u) = sum_j a_j e^{-j u}
    mu = [sum(Fraction(a) * Fraction((-j) ** k) for j, a in enumerate(dist.upper_poly))
          / math.factorial(k) for k in range(K + 1)]
    # 1/M = exp(lam u^alpha)
    inv_m = [Fraction(0)] * (K + 1)
    for m in range(K // alpha + 1):
        inv_m[alpha * m] = lam ** m / math.factorial(m)
    prod = [sum(mu[i] * inv_m[k - i] for i in range(k + 1)) for k in range(K + 1)]
    prod[0] -= 1
    return {k: prod[k] for k in range(1, K + 1)}


# ------------------------------------------------------------- corrections

def _lattice(expansion):
    alpha = as_fraction(expansion.fixed_point.alpha)
    betas = [as_fraction(b) for b in expansion.betas]
    step = fraction_gcd([b - alpha for b in betas] + [alpha])
    return alpha, betas, step


def _cdf_series(expansion, K):
    """``Q_k`` with ``T_s mu / M - 1 = sum_{k=1}^K t**k Q_k(u)``, ``t = eps**step``."""
    alpha, betas, step = _lattice(expansion)
    cs = expansion.coefficients
    # h(u eps) as {eps exponent: GenPoly}
    h = {b: GenPoly.monomial(b, c) for b, c in zip(betas, cs)}
    beta_min = min(betas)
    jmax = int((K * step + alpha) / beta_min)
    log_terms = {}
    power = dict(h)
    for j in range(1, jmax + 1):
        sign = (-1) ** (j + 1) / j
        for e, poly in power.items():
            k = (e - alpha) / step
            if k.denominator != 1:
                raise ParameterError(f"exponent {e} is off the lattice with step {step}")
            k = int(k)
            if 1 <= k <= K:
                log_terms[k] = log_terms[k] + poly.scale(sign) if k in log_terms else poly.scale(sign)
        nxt = {}
        for e1, p1 in power.items():
            for e2, p2 in h.items():
                if e1 + e2 - alpha <= K * step:
                    nxt[e1 + e2] = nxt[e1 + e2] + p1 * p2 if e1 + e2 in nxt else p1 * p2
        power = nxt
    return BiSeries(log_terms, K).exp_minus_one()


def _leading_extrema(r0):
    roots = r0.positive_roots()
    d = r0.derivative()
    for r in roots:
        if abs(d(r)) < 1e-10 * max(1.0, max(abs(c) for c in r0.terms.values())):
            raise ParameterError(f"degenerate extremum of the leading correction at u={r:.6g}")
    return roots


def _perturbed_root(r0, R, order):
    """Series ``r(t)`` solving ``sum_m t**m R[m](r) = 0`` with ``r(0) = r0``."""
    d0 = R[0].derivative()(r0)
    r = TSeries.constant(r0, order)
    for m in range(1, order + 1):
        val = TSeries.zeros(order)
        for j, poly in enumerate(R):
            if j <= order and poly:
                val = val + poly.at_series(r).shift(j)
        c = r.c.copy()
        c[m] = -val[m] / d0
        r = TSeries(c)
    return r


def _value_along(r, Q, fp):
    """``exp(-lam r**alpha) * sum_m t**m Q[m](r)`` as a series."""
    order = r.order
    weight = (r.power(fp.alpha) * -fp.lam).exp()
    poly = TSeries.zeros(order)
    for j, q in enumerate(Q):
        if j <= order and q:
            poly = poly + q.at_series(r).shift(j)
    return weight * poly


def predict_corrections(expansion, target_order, method="perturbed"):
    """Finite-size corrections up to ``n**-target_order``.

    All products of expansion terms whose combined power does not exceed
    ``target_order`` are kept (including the quadratic and higher terms of
    the logarithm and exponential).  The L1 amplitude coefficients come from
    the perturbed extrema of the CDF correction, not from ``int |delta_k|``.

    Parameters
    ----------
    method : {"perturbed", "frozen"}
        ``"perturbed"`` follows the sign changes of the density correction
        as they drift with ``n``.  ``"frozen"`` keeps them at their
        leading-order positions; it agrees with ``"perturbed"`` through the
        first two amplitude orders and is wrong from the third on, where the
        drift contributes at the same order.  Kept for comparison only.

    Raises
    ------
    TruncationError
        If the target needs a ``beta`` beyond the expansion's truncation.
    BasinError
        If the expansion contains relevant or marginal terms.
    """
    fp = expansion.fixed_point
    _require_case2(fp)
    if method not in ("perturbed", "frozen"):
        raise ParameterError(f"unknown amplitude method {method!r}")
    if not expansion.terms:
        raise ParameterError("empty expansion: the law is already at the fixed point")
    _check_basin(expansion.terms, fp)
    alpha, betas, step = _lattice(expansion)
    target = as_fraction(target_order)
    p_step = step / alpha
    K = int(target / p_step)
    if K < 1:
        raise ParameterError(f"target order {target} is below the leading power {p_step}")
    need = alpha + K * step
    if need > as_fraction(expansion.truncation_order):
        missing = as_fraction(expansion.truncation_order)
        missing = missing + step if (missing - alpha) % step == 0 else need
        raise TruncationError(
            f"order n^-{target} needs expansion terms up to beta={float(need):g}; "
            f"the expansion stops at {expansion.truncation_order}, beta={float(missing):g} is missing",
            missing_beta=float(missing),
        )

    bis = _cdf_series(expansion, K)
    ks = [k for k in range(1, K + 1) if bis[k]]
    k0 = ks[0]
    polys = tuple(bis[k] for k in range(k0, K + 1))
    exponents = tuple(Fraction(k) * p_step for k in range(k0, K + 1))

    Rs = [_density_poly(q, fp) for q in polys]
    mo = K - k0
    extrema = _leading_extrema(Rs[0])
    values = [TSeries.zeros(mo)]
    for r0 in extrema:
        if method == "perturbed":
            r = _perturbed_root(r0, Rs, mo)
        else:
            r = TSeries.constant(r0, mo)
        values.append(_value_along(r, polys, fp))
    values.append(TSeries.zeros(mo))
    amp = TSeries.zeros(mo)
    for lo, hi in zip(values[:-1], values[1:]):
        jump = hi - lo
        amp = amp + jump * float(np.sign(jump[0]))
    return CorrectionSeries(
        fixed_point=fp,
        exponents=exponents,
        cdf_polys=polys,
        amp_exponents=exponents,
        amp_coeffs=tuple(float(a) for a in amp.c),
        extrema=tuple(float(math.exp(-r)) for r in extrema),
    )


def shape_correction(series, n, x, upto=None):
    """``sum_k delta_k(x) n**-p_k`` over the first ``upto`` orders."""
    upto = len(series.exponents) if upto is None else upto
    x = _arr(x)
    total = np.zeros(x.shape)
    for k in range(upto):
        total = total + np.asarray(series.delta_coeff(k, x)) * n ** -float(series.exponents[k])
    return _ret(total)
