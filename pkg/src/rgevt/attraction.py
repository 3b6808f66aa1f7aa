"""Case-2 basin-of-attraction classifier.

A law on [0, 1] is attracted to ``M(x) = exp(-lam (-log x)**alpha)`` iff

    lim_{x -> 1} (-log mu(x)) / (-log x)**alpha = lam.

Both ``alpha`` and ``lam`` are read off the approach to ``x = 1`` along the
probe sequence ``x_k = 1 - 10**-k`` and extrapolated with iterated Aitken
acceleration.  The survival function carries the precision: near ``x = 1``
``-log mu = -log1p(-sf)`` and ``-log x = -log1p(-(1 - x))`` are both
computed without cancellation.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Case, FixedPoint, to_unit_interval
from .errors import RGError

__all__ = [
    "AttractionVerdict",
    "NonConvergence",
    "PROBE_EXPONENTS",
    "probe_points",
    "aitken",
    "estimate_alpha",
    "estimate_lambda",
    "classify",
]

PROBE_EXPONENTS = tuple(range(2, 9))
ALPHA_TOL = 1e-3
LAMBDA_RTOL = 1e-4


class NonConvergence(RGError, ArithmeticError):
    """The probe sequence did not settle; carries the probe table."""

    code = "no-convergence"
    exit_status = 10

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = tuple(diagnostics)


@dataclass(frozen=True)
class AttractionVerdict:
    """Outcome of :func:`classify`.

    ``diagnostics`` holds ``(x_k, ratio_k)`` pairs, the un-extrapolated ratio
    ``-log mu(x_k) / (-log x_k)**alpha_hat`` at each probe.
    """

    converges: bool
    alpha_hat: float | None = None
    lambda_hat: float | None = None
    diagnostics: tuple = field(default_factory=tuple)
    message: str = ""

    def __post_init__(self):
        if self.converges and not (
            self.alpha_hat is not None and self.alpha_hat > 0
            and self.lambda_hat is not None and self.lambda_hat > 0
        ):
            raise ValueError("a converging verdict needs positive alpha and lambda estimates")

    @property
    def fixed_point(self):
        if not self.converges:
            return None
        return FixedPoint(Case.CASE2, self.alpha_hat, self.lambda_hat)

    def to_dict(self):
        return {
            "converges": self.converges,
            "alpha": self.alpha_hat,
            "lambda": self.lambda_hat,
            "diagnostics": [list(map(float, d)) for d in self.diagnostics],
            "message": self.message,
        }


def probe_points(exponents=PROBE_EXPONENTS):
    """Probe abscissae ``x_k`` and the exact ``v_k = 1 - x_k``, ``u_k = -log x_k``."""
    x = 1.0 - 10.0 ** -np.asarray(exponents, dtype=float)
    v = 1.0 - x  # exact for x in [1/2, 1]
    u = -np.log1p(-v)
    return x, v, u


def _neg_log_cdf(dist, x):
    """``-log mu(x)`` with the survival function doing the work near 1."""
    sf = np.asarray(dist.sf(x), dtype=float)
    return -np.log1p(-sf)


def aitken(seq):
    """One Aitken delta-squared pass; guarded where the second difference vanishes."""
    s = np.asarray(seq, dtype=float)
    if s.size < 3:
        return s.copy()
    d1 = s[1:-1] - s[:-2]
    d2 = s[2:] - 2 * s[1:-1] + s[:-2]
    scale = np.maximum(np.abs(s[2:]), 1e-300)
    safe = np.abs(d2) > 1e-13 * scale
    # the correction can only be trusted when it is small against the raw step
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(safe, d1 * d1 / d2, 0.0)
    bad = ~np.isfinite(corr) | (np.abs(corr) > 10 * np.abs(s[2:] - s[:-2]) + 1e-300)
    return np.where(safe & ~bad, s[:-2] - corr, s[2:])


def _accelerate(seq):
    """Iterated Aitken until fewer than three values remain; returns all tables."""
    tables = [np.asarray(seq, dtype=float)]
    while tables[-1].size >= 3:
        tables.append(aitken(tables[-1]))
    return tables


def _last_two(tables):
    # the deepest table with at least two entries
    for t in reversed(tables):
        if t.size >= 2:
            return t[-2], t[-1]
    t = tables[0]
    return t[-1], t[-1]


def _check_unit(dist):
    sup = dist.support
    if not sup.is_compact:
        raise NonConvergence("unsupported case: the classifier needs a compact support")
    if (sup.lower, sup.upper) != (0.0, 1.0):
        return to_unit_interval(dist)
    return dist


def _log_table(dist):
    x, _, u = probe_points()
    L = _neg_log_cdf(dist, x)
    if not (np.all(np.isfinite(L)) and np.all(L > 0)):
        raise NonConvergence(
            "-log mu is not positive and finite at the probes (cdf must be < 1 on [0, 1))",
            diagnostics=tuple(zip(x, L)),
        )
    return x, u, L


def estimate_alpha(dist, tol=ALPHA_TOL):
    """Exponent ``alpha`` of ``-log mu(x) ~ lam (-log x)**alpha`` as ``x -> 1``.

    Local slopes of ``log(-log mu)`` against ``log(-log x)`` between
    consecutive probes are accelerated with iterated Aitken passes.

    Raises
    ------
    NonConvergence
        If the two most accelerated slopes differ by more than ``tol``, or
        the estimate is not positive.
    """
    dist = _check_unit(dist)
    x, u, L = _log_table(dist)
    slopes = np.diff(np.log(L)) / np.diff(np.log(u))
    mids = np.sqrt(x[:-1] * x[1:])
    tables = _accelerate(slopes)
    a, b = _last_two(tables)
    diag = tuple(zip(mids, slopes))
    if not (np.isfinite(b) and abs(b - a) <= tol):
        raise NonConvergence(
            f"slope sequence not Cauchy: last accelerated values {a:.6g}, {b:.6g}", diag
        )
    if b <= 0:
        raise NonConvergence(f"non-positive exponent estimate {b:.6g}", diag)
    return float(b)


def estimate_lambda(dist, alpha, rtol=LAMBDA_RTOL):
    """Limit of ``-log mu(x) / (-log x)**alpha`` as ``x -> 1``.

    Raises
    ------
    NonConvergence
        If the accelerated ratios disagree by more than ``rtol`` relative, or
        the limit is not positive.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    dist = _check_unit(dist)
    x, u, L = _log_table(dist)
    ratio = L / u**alpha
    tables = _accelerate(ratio)
    a, b = _last_two(tables)
    diag = tuple(zip(x, ratio))
    if not (np.isfinite(b) and b > 0 and abs(b - a) <= rtol * abs(b)):
        raise NonConvergence(
            f"ratio sequence not converging: last accelerated values {a:.8g}, {b:.8g}", diag
        )
    return float(b)


def classify(dist):
    """Case-2 basin verdict for a compactly supported law.

    Laws on another compact interval are mapped affinely onto [0, 1] first.
    Non-convergence is reported in the verdict, never raised.
    """
    if not dist.support.is_compact:
        return AttractionVerdict(False, message="unsupported case: non-compact support")
    try:
        alpha = estimate_alpha(dist)
    except NonConvergence as exc:
        return AttractionVerdict(False, diagnostics=exc.diagnostics, message=str(exc))
    try:
        lam = estimate_lambda(dist, alpha)
    except NonConvergence as exc:
        return AttractionVerdict(False, alpha_hat=alpha, diagnostics=exc.diagnostics,
                                 message=str(exc))
    x, u, L = _log_table(_check_unit(dist))
    diag = tuple(zip(x, L / u**alpha))
    return AttractionVerdict(
        True, alpha, lam, diag,
        message=f"attracted to exp(-{lam:.8g} (-log x)^{alpha:.8g})",
    )
