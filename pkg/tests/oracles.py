"""Independent high-precision oracles (mpmath), sharing no code with the package."""

import functools

import mpmath as mp


def _tent_mu(y):
    return 2 * y**2 if y <= mp.mpf(1) / 2 else 1 - 2 * (1 - y) ** 2


def _tent_rho(y):
    return 4 * y if y <= mp.mpf(1) / 2 else 4 - 4 * y


def _valley_mu(y):
    return 2 * y * (1 - y) if y <= mp.mpf(1) / 2 else 1 - 2 * y * (1 - y)


def _valley_rho(y):
    return abs(2 - 4 * y)


LAWS = {
    # name: (cdf, density, alpha, lambda)
    "tent": (_tent_mu, _tent_rho, 2, 2),
    "valley": (_valley_mu, _valley_rho, 1, 2),
}


@functools.lru_cache(maxsize=None)
def exact_l1(name, n, dps=30, grid=2000):
    """``int_0^1 |rho_n - M'|`` for the exact RG transform, at ``dps`` digits.

    ``rho_n(x) = g'(x) n mu(g)**(n-1) rho(g)`` with ``g = x**(n**(-1/alpha))``.
    """
    mu, rho, alpha, lam = LAWS[name]
    with mp.workdps(dps):
        n = mp.mpf(n)
        r = n ** (-mp.mpf(1) / alpha)

        def rho_n(x):
            g = x**r
            return r * x ** (r - 1) * n * mu(g) ** (n - 1) * rho(g)

        def m_prime(x):
            u = -mp.log(x)
            return mp.exp(-lam * u**alpha) * lam * alpha * u ** (alpha - 1) / x

        def f(x):
            return rho_n(x) - m_prime(x)

        xs = sorted(set([mp.mpf(i) / grid for i in range(1, grid)]
                        + [1 - mp.mpf(10) ** -k for k in range(4, 12)]))
        roots = []
        for a, b in zip(xs[:-1], xs[1:]):
            if f(a) * f(b) < 0:
                roots.append(mp.findroot(f, (a, b), solver="anderson"))
        kink = (mp.mpf(1) / 2) ** (1 / r)
        pts = [mp.mpf(0)] + roots + [mp.mpf(1)]
        total = mp.mpf(0)
        for a, b in zip(pts[:-1], pts[1:]):
            inner = [a] + ([kink] if a < kink < b else []) + [b]
            total += abs(mp.quad(f, inner))
        return float(total)


def closed_forms():
    """Amplitude constants as printed for the two examples, at 30 digits."""
    with mp.workdps(30):
        e32 = mp.exp(-mp.mpf(3) / 2)
        e2 = mp.exp(-2)
        s3 = mp.sqrt(3)
        return {
            "tent": [float(mp.mpf(3) / 2 * s3 * e32), float(-mp.mpf(15) / 8 * e32),
                     float(mp.mpf(9) / 32 * s3 * e32)],
            "valley": [float(2 * e2), float(3 * e2), float(mp.mpf(5) / 2 * e2)],
        }


def corrected_forms():
    """The same constants from the full perturbed-root expansion."""
    with mp.workdps(30):
        e32 = mp.exp(-mp.mpf(3) / 2)
        e2 = mp.exp(-2)
        s3 = mp.sqrt(3)
        return {
            "tent": [float(mp.mpf(3) / 2 * s3 * e32), float(-mp.mpf(15) / 8 * e32),
                     float(mp.mpf(31) / 96 * s3 * e32)],
            "valley": [float(2 * e2), float(3 * e2), float(mp.mpf(9) / 2 * e2)],
        }


def salpeter_constants():
    """``a``, ``a0`` and ``lambda = a 20**-2.35`` by high-precision quadrature."""
    with mp.workdps(30):
        k = mp.mpf("2.35")
        a = 1 / mp.quad(lambda x: (1 + 19 * x) ** -k, [0, 1])
        a0 = 1 / mp.quad(lambda m: m**-k, [10, 200])
        return float(a), float(a0), float(a * mp.mpf(20) ** -k)
