"""Gaussian moment primitives.

Univariate moments, the two-variable Isserlis/Wick mixed moment, physicists'
Hermite polynomials and the error function.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DegreeTooLarge, MomentOverflow

__all__ = [
    "double_factorial",
    "log_double_factorial",
    "gaussian_moment",
    "wick_mixed_moment",
    "hermite",
    "hermite_e_normalized",
    "erf_phi",
]

_EXACT_LIMIT = 40
_LOG_MAX = math.log(np.finfo(float).max)
MAX_HERMITE_DEGREE = 400


def double_factorial(m: int) -> int:
    """``m!!`` for ``m >= -1`` as an exact integer (``(-1)!! = 0!! = 1``)."""
    if m < -1:
        raise ValueError("double factorial needs m >= -1")
    out = 1
    for v in range(m, 1, -2):
        out *= v
    return out


def log_double_factorial(m: int) -> float:
    """``log(m!!)`` for odd ``m >= -1`` via log-gamma."""
    if m <= 0:
        return 0.0
    if m % 2 == 0:
        k = m // 2
        return k * math.log(2.0) + math.lgamma(k + 1)
    k = (m + 1) // 2  # m!! = (2k)! / (2^k k!)
    return math.lgamma(2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)


def gaussian_moment(k: int, sigma_ii: float) -> float:
    """``E[X^k]`` for ``X ~ N(0, sigma_ii)``.

    Zero for odd ``k``; ``sigma_ii**(k/2) * (k-1)!!`` otherwise. Orders above
    40 are evaluated in log space.

    Raises
    ------
    MomentOverflow
        If the result does not fit in a double.
    """
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k % 2:
        return 0.0
    if k == 0:
        return 1.0
    if sigma_ii == 0.0:
        return 0.0
    half = k // 2
    if k <= _EXACT_LIMIT:
        try:
            return sigma_ii**half * double_factorial(k - 1)
        except OverflowError:
            pass
    log_val = half * math.log(sigma_ii) + log_double_factorial(k - 1)
    if log_val > _LOG_MAX:
        raise MomentOverflow(f"E[X^{k}] with sigma_ii={sigma_ii:g} overflows a double")
    return math.exp(log_val)


def _log_binom(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def wick_mixed_moment(p: int, q: int, sigma_ii: float, sigma_jj: float, sigma_ij: float) -> float:
    """``E[X_i^p X_j^q]`` for a zero-mean bivariate Gaussian.

    Sums over the number ``k`` of cross pairings (``k = p, p-2, ...``, and
    ``k <= q``); ``k`` cross pairs leave ``p-k`` and ``q-k`` self pairings.
    """
    if p < 0 or q < 0:
        raise ValueError("orders must be nonnegative")
    if (p + q) % 2:
        return 0.0
    terms = []
    exact = max(p, q) <= _EXACT_LIMIT
    for k in range(p % 2, min(p, q) + 1, 2):
        if (q - k) % 2:
            continue
        a, b = (p - k) // 2, (q - k) // 2
        if exact:
            coef = (
                double_factorial(p - k - 1)
                * math.comb(p, k)
                * math.comb(q, k)
                * math.factorial(k)
                * double_factorial(q - k - 1)
            )
            try:
                coef = float(coef)
            except OverflowError:
                exact = False
        if exact:
            term = coef * sigma_ii**a * sigma_ij**k * sigma_jj**b
        else:
            if sigma_ij == 0.0 and k > 0:
                continue
            log_mag = (
                log_double_factorial(p - k - 1)
                + _log_binom(p, k)
                + _log_binom(q, k)
                + math.lgamma(k + 1)
                + log_double_factorial(q - k - 1)
                + (a * math.log(sigma_ii) if a else 0.0)
                + (b * math.log(sigma_jj) if b else 0.0)
                + (k * math.log(abs(sigma_ij)) if k else 0.0)
            )
            if log_mag > _LOG_MAX:
                raise MomentOverflow(f"E[X_i^{p} X_j^{q}] overflows a double")
            sign = -1.0 if (sigma_ij < 0 and k % 2) else 1.0
            term = sign * math.exp(log_mag)
        terms.append(term)
    return math.fsum(terms)


def hermite(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by three-term recurrence.

    ``H_0 = 1``, ``H_1 = 2x``, ``H_{k+1} = 2x H_k - 2k H_{k-1}``.
    Accepts scalar or array ``x``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > MAX_HERMITE_DEGREE:
        raise DegreeTooLarge(f"Hermite degree {n} exceeds {MAX_HERMITE_DEGREE}")
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return float(h_prev) if scalar else h_prev
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return float(h) if scalar else h


def hermite_e_normalized(n_max: int, x: float) -> np.ndarray:
    """``He_k(x) / sqrt(k!)`` for ``k = 0..n_max`` (probabilists', normalised).

    Stays finite for degrees where ``H_k`` itself overflows.
    """
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for k in range(1, n_max):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


def erf_phi(z):
    """Error function ``(2/sqrt(pi)) * integral_0^z exp(-t^2) dt``."""
    if np.isscalar(z):
        return math.erf(z)
    return special.erf(np.asarray(z, dtype=float))
