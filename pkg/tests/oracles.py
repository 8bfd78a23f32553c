"""Independent reference computations used to freeze expected values.

Nothing here calls scipy.stats: densities are written out by hand and
integrated with adaptive quadrature, and quantiles come from bisection on
those integrals.
"""

import math

import numpy as np
from scipy import integrate


def _log_density(family, x, params):
    if family == "normal":
        return -0.5 * x * x - 0.5 * math.log(2 * math.pi)
    if family == "student_t":
        (v,) = params
        return (
            math.lgamma((v + 1) / 2) - math.lgamma(v / 2) - 0.5 * math.log(v * math.pi)
            - (v + 1) / 2 * math.log1p(x * x / v)
        )
    if family == "chi_square":
        (k,) = params
        if x <= 0:
            return -math.inf
        return (k / 2 - 1) * math.log(x) - x / 2 - (k / 2) * math.log(2) - math.lgamma(k / 2)
    if family == "f":
        d1, d2 = params
        if x <= 0:
            return -math.inf
        lbeta = math.lgamma(d1 / 2) + math.lgamma(d2 / 2) - math.lgamma((d1 + d2) / 2)
        return (
            (d1 / 2) * math.log(d1 / d2) + (d1 / 2 - 1) * math.log(x)
            - ((d1 + d2) / 2) * math.log1p(d1 * x / d2) - lbeta
        )
    raise ValueError(family)


def density(family, x, *params):
    return math.exp(_log_density(family, x, params))


def cdf(family, x, *params):
    """CDF by adaptive quadrature of the density."""
    f = lambda t: density(family, t, *params)  # noqa: E731
    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=500)
    if family in ("normal", "student_t"):
        if x <= 0:
            return integrate.quad(f, -np.inf, x, **kw)[0]
        return 0.5 + integrate.quad(f, 0.0, x, **kw)[0]
    if x <= 0:
        return 0.0
    # split at the mode region so the endpoint singularity (df < 2) stays isolated
    lower = integrate.quad(f, 0.0, x, **kw)[0]
    upper = integrate.quad(f, x, np.inf, **kw)[0]
    return lower / (lower + upper)


def quantile(family, prob, *params, lo=None, hi=None, tol=1e-12):
    """Bisection on the quadrature CDF."""
    if lo is None:
        lo = -50.0 if family in ("normal", "student_t") else 0.0
    if hi is None:
        hi = 1.0
        while cdf(family, hi, *params) < prob:
            hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cdf(family, mid, *params) < prob:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def subspace_max_angle_deg(A, B):
    """Largest principal angle between column spans, via SVD of orthonormal bases."""
    Qa, _ = np.linalg.qr(np.atleast_2d(A.T).T)
    Qb, _ = np.linalg.qr(np.atleast_2d(B.T).T)
    s = np.linalg.svd(Qa.T @ Qb, compute_uv=False)
    return float(np.degrees(np.arccos(np.clip(s.min(), -1, 1))))


def abs_cos(a, b):
    return abs(float(a @ b)) / (np.linalg.norm(a) * np.linalg.norm(b))
