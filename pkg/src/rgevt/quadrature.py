"""Adaptive quadrature helpers.

Thin wrapper around QUADPACK (``scipy.integrate.quad``, adaptive
Gauss-Kronrod 21-point panels with bisection) that turns silent accuracy
loss into an exception.
"""

import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError

DEFAULT_TOL = 1e-10
PANEL_BUDGET = 10_000


def _quad(f, a, b, tol, points, rtol):
    if a == b:
        return 0.0, 0.0, False, {"last": 0}
    kwargs = dict(epsabs=tol, epsrel=rtol, limit=PANEL_BUDGET, full_output=1)
    if points is not None and np.isfinite(a) and np.isfinite(b):
        inner = [p for p in points if a < p < b]
        if inner:
            kwargs["points"] = inner
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(lambda t: float(f(t)), a, b, **kwargs)
    value, err, info = out[0], out[1], out[2]
    # ier is only present in the tuple when quad flags a problem
    ier = 0 if len(out) == 3 else 1
    # an error estimate at the roundoff floor of the result is accepted
    floor = max(tol, rtol * abs(value), 64 * np.finfo(float).eps * abs(value), 1e-14)
    return value, err, bool(ier and err > floor), info


def integrate_adaptive(f, a, b, tol=DEFAULT_TOL, points=None, rtol=0.0):
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Raises
    ------
    QuadratureError
        If the panel budget is exhausted or the error estimate exceeds ``tol``.
        The achieved error estimate is attached as ``.achieved``.
    """
    if a == b:
        return 0.0
    value, err, flagged, info = _quad(f, a, b, tol, points, rtol)
    if flagged:
        raise QuadratureError(
            f"quadrature on [{a}, {b}] stopped after {info['last']} panels "
            f"with error estimate {err:.3e} > {tol:.1e}",
            achieved=err,
        )
    if not np.isfinite(value):
        raise QuadratureError(f"non-finite integral on [{a}, {b}]", achieved=np.inf)
    return value


def quad_with_error(f, a, b, tol=DEFAULT_TOL, points=None, rtol=0.0):
    """``(value, error_estimate, flagged)`` without raising on accuracy loss.

    ``flagged`` is true when QUADPACK reported trouble (budget exhausted,
    roundoff detected, ...) and the error estimate is above the roundoff
    floor of the result.
    """
    value, err, flagged, _ = _quad(f, a, b, tol, points, rtol)
    if not np.isfinite(value):
        return value, np.inf, True
    return value, err, flagged
