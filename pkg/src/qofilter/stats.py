"""Chi-square distribution functions and seeded Gaussian noise.

The chi-square CDF is the regularized lower incomplete gamma function
``P(n/2, t/2)``, evaluated by its power series below ``x = a + 1`` and by a
Lentz continued fraction for the complement above it.

Noise streams use NumPy's PCG64 bit generator seeded with the caller's
integer seed, and ``Generator.standard_normal`` for the Gaussian transform.
The same seed and arguments always give the same stream.
"""

from __future__ import annotations

import math

import numpy as np

from .linalg import LinAlgError, as_vector, sym_eig

__all__ = [
    "regularized_gamma",
    "chi2_cdf",
    "chi2_sf",
    "chi2_quantile",
    "rng_from_seed",
    "gaussian_vector",
]

GAMMA_RTOL = 1e-14
GAMMA_MAX_TERMS = 10_000
QUANTILE_MAX_ITERS = 200


def _check_dof(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {n}")
    return int(n)


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by the series  e^-x x^a / Gamma(a+1) * sum x^k / ((a+1)...(a+k))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(GAMMA_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * GAMMA_RTOL:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_frac(a: float, x: float) -> float:
    # Q(a, x) by the modified Lentz continued fraction
    fpmin = 1e-300
    b = x + 1.0 - a
    c = 1.0 / fpmin
    d = 1.0 / b
    h = d
    for i in range(1, GAMMA_MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < fpmin:
            d = fpmin
        c = b + an / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < GAMMA_RTOL:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma(a: float, x: float) -> tuple[float, float]:
    """Return ``(P(a, x), Q(a, x))``, the regularized incomplete gamma pair."""
    if a <= 0:
        raise ValueError("shape parameter must be positive")
    if x < 0:
        raise ValueError("argument must be non-negative")
    if x == 0:
        return 0.0, 1.0
    if x < a + 1.0:
        p = _gamma_series(a, x)
        return p, 1.0 - p
    q = _gamma_cont_frac(a, x)
    return 1.0 - q, q


def chi2_cdf(t: float, n: int) -> float:
    """P(chi2_n <= t)."""
    n = _check_dof(n)
    if not t >= 0:
        raise ValueError(f"chi-square argument must be >= 0, got {t}")
    if math.isinf(t):
        return 1.0
    return regularized_gamma(0.5 * n, 0.5 * t)[0]


def chi2_sf(t: float, n: int) -> float:
    """P(chi2_n > t), computed directly so that small tails keep their precision."""
    n = _check_dof(n)
    if not t >= 0:
        raise ValueError(f"chi-square argument must be >= 0, got {t}")
    if math.isinf(t):
        return 0.0
    return regularized_gamma(0.5 * n, 0.5 * t)[1]


def chi2_quantile(gamma: float, n: int) -> float:
    """Root ``t`` of ``chi2_cdf(t, n) = gamma`` by bracketed bisection."""
    n = _check_dof(n)
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {gamma}")
    lo = 0.0
    hi = n + 10.0 * math.sqrt(2.0 * n)
    while chi2_cdf(hi, n) < gamma:
        lo, hi = hi, 2.0 * hi
    for _ in range(QUANTILE_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if chi2_cdf(mid, n) < gamma:
            lo = mid
        else:
            hi = mid
    # both ends are within an ulp; keep the one whose CDF is closer
    return lo if abs(chi2_cdf(lo, n) - gamma) < abs(chi2_cdf(hi, n) - gamma) else hi


def rng_from_seed(seed: int) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.PCG64(int(seed)))


def gaussian_vector(seed: int, m: int, mean=None, cov=None, sigma: float | None = None) -> np.ndarray:
    """Draw one sample of length ``m`` from N(mean, cov).

    Pass either a full SPD covariance ``cov`` or a scalar white-noise level
    ``sigma``; with neither, unit white noise is drawn.
    """
    mean = np.zeros(m) if mean is None else as_vector(mean, "mean")
    if mean.shape != (m,):
        raise ValueError(f"mean must have length {m}")
    if cov is not None and sigma is not None:
        raise ValueError("give cov or sigma, not both")
    if sigma is not None:
        if sigma < 0:
            raise ValueError("sigma must be non-negative")
        if sigma == 0:
            return mean.copy()
    z = rng_from_seed(seed).standard_normal(m)
    if cov is None:
        return mean + (1.0 if sigma is None else sigma) * z
    q, vals = sym_eig(cov)
    if vals[-1] <= 0:
        raise LinAlgError("covariance not positive definite")
    return mean + q @ (np.sqrt(vals) * (q.T @ z))
