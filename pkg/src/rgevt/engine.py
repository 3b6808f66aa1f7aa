"""Exact RG transform ``T_s mu(x) = mu(g_s(x))**n`` with ``n = e**s``.

The transform is evaluated in log space, ``n * log mu(g_s(x))``, so block
sizes in the millions keep full precision where the extremes live.
Repeated application with the same group is folded into a single ``s``.
"""

import math

import numpy as np
from scipy import optimize

from .distributions import Case, Distribution, _arr, _ret
from .errors import ConfigurationError, ParameterError, QuadratureError
from .quadrature import DEFAULT_TOL, quad_with_error
from .rescaling import rescale, rescale_derivative

__all__ = [
    "TransformedDistribution",
    "apply",
    "fixed_point_residual",
    "l1_distance",
]


def _pow_from_log(logc, k):
    """``exp(k * logc)`` with ``0**0 = 1`` and ``0**k = 0`` for k > 0."""
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.exp(k * logc)
    if k == 0:
        return np.ones_like(out)
    return np.where(np.isneginf(logc), 0.0, out)


class TransformedDistribution(Distribution):
    """The law of the rescaled maximum of ``n = e**s`` draws from ``base``."""

    __slots__ = ("base", "group", "s")

    def __init__(self, base, group, s):
        n = math.exp(s)
        sup = base.support

        def inside(x):
            return np.clip(x, sup.lower, sup.upper)

        exact_gap = group.case is Case.CASE2 and base.has_sf_gap
        shrink = math.exp(-s / group.alpha)

        def base_logcdf(x, g):
            lc = np.asarray(base.logcdf(g))
            if not exact_gap:
                return lc
            # 1 - g = -expm1(e^{-s/alpha} log x) keeps every digit near x = 1,
            # where forming 1 - g from g would cancel
            with np.errstate(divide="ignore"):
                v = -np.expm1(shrink * np.log(x))
                near = np.log1p(-np.asarray(base.sf_gap(v)))
            return np.where(g > 0.5, near, lc)

        def logcdf(x):
            xc = inside(x)
            return n * base_logcdf(xc, rescale(group, s, xc))

        def cdf(x):
            return np.exp(logcdf(x))

        def sf(x):
            return -np.expm1(logcdf(x))

        def pdf(x):
            xc = inside(x)
            g = rescale(group, s, xc)
            dg = rescale_derivative(group, s, xc)
            lc = base_logcdf(xc, g)
            with np.errstate(invalid="ignore", over="ignore"):
                dens = dg * n * _pow_from_log(lc, n - 1) * np.asarray(base.pdf(g))
            dens = np.where(np.isnan(dens), 0.0, dens)
            return np.where(sup.contains(x), dens, 0.0)

        def isf(q):
            # mu(g) = (1 - q)**(1/n)  <=>  base survival = 1 - (1 - q)**(1/n)
            with np.errstate(divide="ignore"):
                q_base = -np.expm1(np.log1p(-q) / n)
            return rescale(group, -s, inside(np.asarray(base.isf(q_base))))

        def quantile(p):
            with np.errstate(divide="ignore"):
                q_base = -np.expm1(np.log(p) / n)
            return rescale(group, -s, inside(np.asarray(base.isf(q_base))))

        kinks = tuple(float(rescale(group, -s, k)) for k in base.kinks)
        super().__init__(
            cdf=cdf, pdf=pdf, sf=sf, logcdf=logcdf,
            quantile=quantile if base.has_quantile else None,
            isf=isf if base.has_quantile else None,
            support=sup, name=f"T[{group.ident}, n={n:g}]({base.name})",
            kinks=kinks,
        )
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "s", float(s))

    @property
    def n(self):
        return math.exp(self.s)


def apply(group, s, dist):
    """Apply ``T_s`` built on ``group`` to ``dist``.

    A distribution that is already a transform under the same group is
    re-based, ``T_{s1} T_{s2} = T_{s1 + s2}``, instead of being wrapped.
    """
    if not s >= 0 or not math.isfinite(s):
        raise ParameterError(f"the RG step s must be a finite non-negative number, got {s}")
    if dist.support != group.support:
        raise ConfigurationError(
            f"{dist.name or 'distribution'} lives on [{dist.support.lower}, "
            f"{dist.support.upper}] but {group.ident} acts on "
            f"[{group.support.lower}, {group.support.upper}]"
        )
    if isinstance(dist, TransformedDistribution) and dist.group == group:
        return TransformedDistribution(dist.base, group, dist.s + s)
    return TransformedDistribution(dist, group, s)


def fixed_point_residual(fp, s, grid):
    """Max over ``grid`` of ``|M(g_s(x))**n - M(x)|`` for the matching group."""
    grid = _arr(grid)
    m = fp.distribution()
    g = rescale(fp.group(), s, grid)
    lhs = _pow_from_log(np.asarray(m.logcdf(g)), math.exp(s))
    return float(np.max(np.abs(lhs - np.asarray(m.cdf(grid)))))


# ------------------------------------------------------------------ L1

def _density(d):
    return d.pdf if hasattr(d, "pdf") else d


def _tail_cut(d1, d2, mass=1e-12):
    """Smallest ``u`` (coarsely) beyond which ``x = e**-u`` carries < ``mass``."""
    if not (hasattr(d1, "cdf") and hasattr(d2, "cdf")):
        return 700.0
    u = 1.0
    while u < 700.0 and float(d1.cdf(math.exp(-u))) + float(d2.cdf(math.exp(-u))) >= mass:
        u *= 1.5
    return min(u, 700.0)


def l1_distance(d1, d2, tol=DEFAULT_TOL, grid_points=4000):
    """``integral_0^1 |d1(x) - d2(x)| dx`` for two densities on [0, 1].

    Arguments are :class:`Distribution` objects or plain density callables.
    The integral is taken in ``u = -log x`` so that endpoint singularities
    at ``x = 0`` become smooth decaying tails, truncated where the remaining
    probability mass of both laws is below 1e-12.  Sign changes of the
    difference are located by a grid scan refined with Brent's method, and
    each signed piece is integrated adaptively.

    Raises
    ------
    QuadratureError
        If a piece cannot be integrated to ``tol``.
    """
    f1, f2 = _density(d1), _density(d2)

    def diff_u(u):
        x = np.exp(-np.asarray(u, dtype=float))
        return (np.asarray(f1(x)) - np.asarray(f2(x))) * x

    u_cut = _tail_cut(d1, d2)
    grid = np.concatenate(([0.0], np.geomspace(1e-9, u_cut, grid_points)))
    vals = diff_u(grid)
    breaks = [0.0]
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        root = optimize.brentq(lambda u: float(diff_u(u)), grid[i], grid[i + 1],
                               xtol=1e-12, rtol=4 * np.finfo(float).eps)
        breaks.append(root)
    breaks.append(u_cut)

    kinks = []
    for d in (d1, d2):
        for k in getattr(d, "kinks", ()):
            if 0 < k < 1:
                kinks.append(-math.log(k))

    # each piece is asked for its share of tol; the budget is enforced on
    # the sum, since rounding-level sign changes near x = 1 can create many
    # tiny pieces whose individual share is below what QUADPACK certifies
    total, err_total, worst = 0.0, 0.0, None
    piece_tol = tol / (len(breaks) - 1)
    for a, b in zip(breaks[:-1], breaks[1:]):
        value, err, flagged = quad_with_error(diff_u, a, b, tol=piece_tol, points=kinks)
        total += abs(value)
        err_total += err
        if flagged and (worst is None or err > worst[2]):
            worst = (a, b, err)
    if not np.isfinite(total) or (worst is not None and err_total > tol):
        a, b, err = worst if worst is not None else (0.0, u_cut, np.inf)
        raise QuadratureError(
            f"L1 distance: summed error estimate {err_total:.3e} > {tol:.1e} "
            f"(worst piece u in [{a:.6g}, {b:.6g}], {err:.3e})",
            achieved=err_total,
        )
    return total
