"""Small formal-series toolkit.

``GenPoly``
    Finite sums ``sum_g c_g u**g`` with rational exponents ``g`` (generalised
    polynomials in ``u = -log x``).
``TSeries``
    Truncated power series ``sum_k a_k t**k`` with float coefficients, used
    for perturbed roots and values along them.
``BiSeries``
    Truncated power series in ``t`` whose coefficients are ``GenPoly``.
"""

from fractions import Fraction
from math import gcd, lcm

import numpy as np

__all__ = ["as_fraction", "fraction_gcd", "GenPoly", "TSeries", "BiSeries"]


def as_fraction(value, max_denominator=1000):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(value).limit_denominator(max_denominator)


def fraction_gcd(values):
    """Greatest common divisor of positive rationals."""
    values = [as_fraction(v) for v in values if v != 0]
    if not values:
        raise ValueError("gcd of an empty set")
    den = lcm(*(v.denominator for v in values))
    num = 0
    for v in values:
        num = gcd(num, abs(v.numerator * (den // v.denominator)))
    return Fraction(num, den)


class GenPoly:
    """Generalised polynomial ``sum c_g u**g`` (rational ``g``)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for g, c in (terms or {}).items():
            g = as_fraction(g)
            clean[g] = clean.get(g, 0.0) + c
        self.terms = {g: c for g, c in clean.items() if c != 0}

    @classmethod
    def monomial(cls, exponent, coeff=1.0):
        return cls({exponent: coeff})

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        body = " + ".join(f"{c:.6g}*u^{g}" for g, c in sorted(self.terms.items()))
        return f"GenPoly({body or '0'})"

    def __add__(self, other):
        out = dict(self.terms)
        for g, c in other.terms.items():
            out[g] = out.get(g, 0) + c
        return GenPoly(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other):
        if not isinstance(other, GenPoly):
            return self.scale(other)
        out = {}
        for g1, c1 in self.terms.items():
            for g2, c2 in other.terms.items():
                out[g1 + g2] = out.get(g1 + g2, 0) + c1 * c2
        return GenPoly(out)

    __rmul__ = __mul__

    def scale(self, k):
        return GenPoly({g: k * c for g, c in self.terms.items()})

    def shift(self, dg):
        """Multiply by ``u**dg``."""
        dg = as_fraction(dg)
        return GenPoly({g + dg: c for g, c in self.terms.items()})

    def derivative(self):
        return GenPoly({g - 1: c * float(g) for g, c in self.terms.items() if g != 0})

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for g, c in self.terms.items():
                out = out + c * u ** float(g)
        return out[()] if out.ndim == 0 else out

    def at_series(self, r):
        """Compose with a truncated series ``r(t)`` having ``r(0) > 0``."""
        out = TSeries.zeros(r.order)
        for g, c in self.terms.items():
            out = out + r.power(float(g)) * c
        return out

    def positive_roots(self):
        """Real roots in ``(0, inf)``, sorted.

        Exponents are rational, so ``u = w**q`` turns the sum into an
        ordinary polynomial in ``w``.
        """
        if not self.terms:
            raise ValueError("the zero polynomial has no isolated roots")
        q = lcm(*(g.denominator for g in self.terms))
        low = min(self.terms)
        degs = {int((g - low) * q): c for g, c in self.terms.items()}
        top = max(degs)
        coeffs = np.zeros(top + 1)
        for d, c in degs.items():
            coeffs[top - d] = c
        w = np.roots(coeffs)
        scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
        real = w[np.abs(w.imag) <= 1e-9 * scale].real
        real = np.sort(real[real > 1e-12])
        roots = []
        for w0 in real:
            # polish in u with Newton steps on the original sum
            u0 = float(w0) ** q
            d = self.derivative()
            for _ in range(8):
                step = self(u0) / d(u0)
                if not np.isfinite(step):
                    break
                u0 -= step
            if not roots or abs(u0 - roots[-1]) > 1e-9 * max(1.0, u0):
                roots.append(u0)
        return roots


class TSeries:
    """Truncated power series in ``t`` up to (and including) ``t**order``."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)

    @classmethod
    def zeros(cls, order):
        return cls(np.zeros(order + 1))

    @classmethod
    def constant(cls, value, order):
        out = np.zeros(order + 1)
        out[0] = value
        return cls(out)

    @property
    def order(self):
        return len(self.c) - 1

    def __getitem__(self, k):
        return self.c[k]

    def __repr__(self):
        return f"TSeries({self.c.tolist()})"

    def __add__(self, other):
        if isinstance(other, TSeries):
            return TSeries(self.c + other.c)
        out = self.c.copy()
        out[0] += other
        return TSeries(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1.0 if isinstance(other, TSeries) else -other)

    def __neg__(self):
        return TSeries(-self.c)

    def __mul__(self, other):
        if isinstance(other, TSeries):
            return TSeries(np.convolve(self.c, other.c)[: len(self.c)])
        return TSeries(self.c * other)

    __rmul__ = __mul__

    def shift(self, k):
        """Multiply by ``t**k`` and truncate."""
        out = np.zeros_like(self.c)
        if k <= self.order:
            out[k:] = self.c[: len(self.c) - k]
        return TSeries(out)

    def exp(self):
        # a' = a * s'  solved coefficient by coefficient
        n = len(self.c)
        out = np.zeros(n)
        out[0] = np.exp(self.c[0])
        for k in range(1, n):
            out[k] = sum(j * self.c[j] * out[k - j] for j in range(1, k + 1)) / k
        return TSeries(out)

    def log(self):
        a0 = self.c[0]
        if a0 <= 0:
            raise ValueError("log of a series needs a positive constant term")
        n = len(self.c)
        out = np.zeros(n)
        out[0] = np.log(a0)
        for k in range(1, n):
            out[k] = (self.c[k] - sum(j * out[j] * self.c[k - j] for j in range(1, k)) / k) / a0
        return TSeries(out)

    def power(self, gamma):
        if gamma == 0:
            return TSeries.constant(1.0, self.order)
        if float(gamma).is_integer() and gamma > 0:
            out = TSeries.constant(1.0, self.order)
            for _ in range(int(gamma)):
                out = out * self
            return out
        return (self.log() * gamma).exp()


class BiSeries:
    """Truncated series ``sum_{k<=order} t**k P_k(u)`` with ``GenPoly`` coefficients."""

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs, order):
        self.order = order
        self.coeffs = {k: p for k, p in coeffs.items() if k <= order and p}

    def __getitem__(self, k):
        return self.coeffs.get(k, GenPoly())

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, p in other.coeffs.items():
            out[k] = out[k] + p if k in out else p
        return BiSeries(out, min(self.order, other.order))

    def __mul__(self, other):
        if not isinstance(other, BiSeries):
            return BiSeries({k: p.scale(other) for k, p in self.coeffs.items()}, self.order)
        order = min(self.order, other.order)
        out = {}
        for k1, p1 in self.coeffs.items():
            for k2, p2 in other.coeffs.items():
                if k1 + k2 <= order:
                    out[k1 + k2] = out[k1 + k2] + p1 * p2 if k1 + k2 in out else p1 * p2
        return BiSeries(out, order)

    __rmul__ = __mul__

    def exp_minus_one(self):
        """``exp(self) - 1`` for a series without a ``t**0`` term."""
        if 0 in self.coeffs:
            raise ValueError("exp_minus_one needs a series vanishing at t = 0")
        out = BiSeries({}, self.order)
        term = BiSeries({}, self.order)
        term.coeffs = dict(self.coeffs)
        m = 1
        while term.coeffs:
            out = out + term
            m += 1
            term = term * self * (1.0 / m)
        return out
