"""Independent reference computations used only by the tests.

Nothing here calls into the package's numerical code.
"""

import itertools
import math
from fractions import Fraction

import mpmath

mpmath.mp.dps = 30


def pairing_moment(p, q, s_ii, s_jj, s_ij):
    """``E[X_i^p X_j^q]`` by brute-force enumeration of perfect matchings."""
    labels = [0] * p + [1] * q
    if len(labels) % 2:
        return 0.0
    cov = ((s_ii, s_ij), (s_ij, s_jj))
    total = 0.0
    # enumerate matchings recursively
    def rec(items, acc):
        nonlocal total
        if not items:
            total += acc
            return
        a = items[0]
        for k in range(1, len(items)):
            rec(items[1:k] + items[k + 1 :], acc * cov[a][items[k]])

    rec(labels, 1.0)
    return total


def mp_gauss_expect(f, var):
    """``E[f(X)]`` for ``X ~ N(0, var)`` with mpmath quadrature."""
    s = mpmath.sqrt(var)
    return mpmath.quad(lambda x: f(x) * mpmath.exp(-x * x / (2 * var)), [-mpmath.inf, -1, 0, 1, mpmath.inf]) / (
        s * mpmath.sqrt(2 * mpmath.pi)
    )


def mp_cov_conditional(f_i, inner_mean, s_ii, s_jj, s_ij, nu_i, nu_j):
    """Covariance via ``E[f_i(X) (E[f_j(W) | X] - nu_j)]``; ``inner_mean(m, v)`` is ``E[f_j(N(m, v))]``."""
    v = s_jj - s_ij * s_ij / s_ii

    def outer(x):
        return f_i(x) * (inner_mean(s_ij * x / s_ii, v) - nu_j)

    return mp_gauss_expect(outer, s_ii)


def x_indicator_cov(rho):
    """Covariance of ``x 1{|x|<=1}`` at unit variances and correlation ``rho``, 30 digits.

    The inner conditional mean of ``w 1{|w|<=1}`` for ``w ~ N(m, v)`` is closed
    form in erf and exp.
    """
    rho = mpmath.mpf(rho)
    v = 1 - rho * rho
    sd = mpmath.sqrt(v)

    def inner(m, v_):
        a = (-1 - m) / sd
        b = (1 - m) / sd
        phi = lambda z: mpmath.exp(-z * z / 2) / mpmath.sqrt(2 * mpmath.pi)  # noqa: E731
        big = lambda z: mpmath.ncdf(z)  # noqa: E731
        return m * (big(b) - big(a)) + sd * (phi(a) - phi(b))

    def outer(x):
        if abs(x) > 1:
            return mpmath.mpf(0)
        return x * inner(rho * x, v)

    return mpmath.quad(lambda x: outer(x) * mpmath.exp(-x * x / 2), [-1, 0, 1]) / mpmath.sqrt(2 * mpmath.pi)


def indicator_cov(rho):
    """Covariance of ``1{|x|<=1}`` at unit variances, 30 digits."""
    rho = mpmath.mpf(rho)
    sd = mpmath.sqrt(1 - rho * rho)
    p = mpmath.erf(1 / mpmath.sqrt(2))

    def inner(x):
        return mpmath.ncdf((1 - rho * x) / sd) - mpmath.ncdf((-1 - rho * x) / sd)

    e = mpmath.quad(lambda x: inner(x) * mpmath.exp(-x * x / 2), [-1, 0, 1]) / mpmath.sqrt(2 * mpmath.pi)
    return e - p * p


def finite_difference(fn, x, h=1e-5):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def counted_moment(p, q, s_ii, s_jj, s_ij):
    """``E[X_i^p X_j^q]`` in exact rationals by counting matchings with ``k`` cross pairs."""
    s_ii, s_jj, s_ij = (Fraction(v) for v in (s_ii, s_jj, s_ij))

    def odd_df(m):
        return math.prod(range(m, 0, -2)) if m > 0 else 1

    total = Fraction(0)
    for k in range(min(p, q) + 1):
        if (p - k) % 2 or (q - k) % 2:
            continue
        count = math.comb(p, k) * math.comb(q, k) * math.factorial(k)
        count *= odd_df(p - k - 1) * odd_df(q - k - 1)
        total += count * s_ij**k * s_ii ** ((p - k) // 2) * s_jj ** ((q - k) // 2)
    return total


def polynomial_tau(coefs_i, coefs_j, s_ii, s_jj, s_ij):
    """Covariance of two polynomials, exact in rationals then rounded once."""
    ci = [Fraction(c) for c in coefs_i]
    cj = [Fraction(c) for c in coefs_j]
    m_ij = sum(
        a * b * counted_moment(p, q, s_ii, s_jj, s_ij)
        for (p, a), (q, b) in itertools.product(enumerate(ci), enumerate(cj))
    )
    nu_i = sum(a * counted_moment(p, 0, s_ii, s_jj, s_ij) for p, a in enumerate(ci))
    nu_j = sum(b * counted_moment(0, q, s_ii, s_jj, s_ij) for q, b in enumerate(cj))
    return float(m_ij - nu_i * nu_j)


def erf_by_quadrature(z):
    return float(2 / mpmath.sqrt(mpmath.pi) * mpmath.quad(lambda t: mpmath.exp(-t * t), [0, z]))


def hermite_direct(n, x):
    """Physicists' Hermite polynomial from the explicit sum formula."""
    return sum(
        (-1) ** m * math.factorial(n) / (math.factorial(m) * math.factorial(n - 2 * m)) * (2 * x) ** (n - 2 * m)
        for m in range(n // 2 + 1)
    )
