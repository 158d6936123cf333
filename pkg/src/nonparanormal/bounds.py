"""Second-order approximations of ``tau_ij`` in ``s_ij`` with explicit remainders.

Both regimes write ``tau_ij ~ G_1 s_ij + G_2 s_ij^2 / 2``; the remainder
is bounded by a constant times ``|s_ij|^3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import SeriesControl, Taylor
from .errors import GrowthViolation, InputError, RatioViolation
from .quadrature import QuadConfig
from .series import FkFunction
from .transforms import FkStarFunction, _real

__all__ = [
    "SecondOrderEstimate",
    "second_order_series",
    "second_order_fourier",
    "fit_growth_constants",
    "lorentzian_a",
    "lorentzian_a_printed",
]


@dataclass(frozen=True)
class SecondOrderEstimate:
    """``linear_coeff * s + quad_coeff * s^2`` with ``|tau - that| <= remainder_bound``."""

    linear_coeff: float
    quad_coeff: float
    remainder_bound: float
    regime: str
    sigma_ij: float

    @property
    def estimate(self) -> float:
        s = self.sigma_ij
        return self.linear_coeff * s + self.quad_coeff * s * s


def _cube(s):
    a = abs(s)
    return a * a * a


def second_order_series(
    f: Taylor,
    sigma_ii: float,
    sigma_jj: float,
    sigma_ij: float,
    eps: float | None = None,
    C: float | None = None,
    M: float | None = None,
    ctl: SeriesControl | None = None,
) -> SecondOrderEstimate:
    """Second-order estimate for ``f_i = f_j = f`` satisfying ``|f^(a)(0)| <= C M^a``.

    The remainder bound is

        (1/6) |s_ij|^3 C^2 M^6 exp(M^2 (s_ii + s_jj) / 2) exp(N M^2)

    with ``N = max(s_ii, s_jj)``, or ``N = eps`` when ``|s_ij| <= eps`` is known.
    ``C`` and ``M`` default to the growth constants declared on ``f``.
    """
    ctl = ctl or SeriesControl()
    C = f.C if C is None else float(C)
    M = f.K if M is None else float(M)
    if not (C > 0 and M > 0):
        raise InputError("C and M must be positive")
    if eps is not None:
        if abs(sigma_ij) > eps:
            raise InputError(f"|sigma_ij| = {abs(sigma_ij):g} exceeds eps = {eps:g}")
        n_const = float(eps)
    else:
        n_const = max(sigma_ii, sigma_jj)
    _check_growth(f, C, M, ctl)
    f1i, _ = FkFunction(f, 1)(sigma_ii / 2, ctl)
    f1j, _ = FkFunction(f, 1)(sigma_jj / 2, ctl)
    f2i, _ = FkFunction(f, 2)(sigma_ii / 2, ctl)
    f2j, _ = FkFunction(f, 2)(sigma_jj / 2, ctl)
    bound = (
        _cube(sigma_ij)
        / 6.0
        * C
        * C
        * M**6
        * math.exp(M * M * (sigma_ii + sigma_jj) / 2)
        * math.exp(n_const * M * M)
    )
    return SecondOrderEstimate(f1i * f1j, 0.5 * f2i * f2j, bound, "series", sigma_ij)


def _check_growth(f, C, M, ctl, count=None):
    top = f.degree if f.degree is not None else (count or 2 * ctl.max_terms)
    for a in range(top + 1):
        v = abs(f.derivative(a))
        if v > C * M**a * (1 + 1e-12):
            raise GrowthViolation(f"|f^({a})(0)| = {v:g} exceeds C M^a with C={C:g}, M={M:g}")


def fit_growth_constants(
    f: Taylor,
    sigma_ii: float,
    sigma_jj: float,
    grid=None,
    max_index: int | None = None,
):
    """Pick ``(C, M)`` minimising the series remainder constant over a grid of ``M``.

    For each ``M``, ``C = max_a |f^(a)(0)| / M^a`` over ``a <= max_index``
    (the degree for polynomials). A convenience: the growth condition is only
    verified up to ``max_index``.
    """
    if max_index is None:
        if f.degree is None:
            raise InputError("max_index is required for non-polynomial f")
        max_index = f.degree
    grid = np.geomspace(0.05, 20.0, 400) if grid is None else np.asarray(grid, dtype=float)
    derivs = [abs(f.derivative(a)) for a in range(max_index + 1)]
    n_const = max(sigma_ii, sigma_jj)
    best = None
    for M in grid:
        C = max(max(d / M**a for a, d in enumerate(derivs)), np.finfo(float).tiny)
        log_k = 2 * math.log(C) + 6 * math.log(M) + M * M * ((sigma_ii + sigma_jj) / 2 + n_const)
        if best is None or log_k < best[0]:
            best = (log_k, C, float(M))
    return best[1], best[2]


def second_order_fourier(
    g,
    bound: float,
    sigma_ii: float,
    sigma_jj: float,
    sigma_ij: float,
    a: float,
    quad: QuadConfig | None = None,
    breakpoints=(),
) -> SecondOrderEstimate:
    """Second-order estimate for ``f = (1/2pi) int g(y) exp(-i x y) dy`` with ``|g| <= bound``.

    Needs ``|s_ij| / sqrt(s_ii s_jj) < a < 1``; the remainder bound is
    ``|s_ij|^3 bound^2 / (pi^2 sqrt(s_ii s_jj) (1 - a))``.

    Raises
    ------
    RatioViolation
        If the correlation condition fails.
    """
    if not 0 < a < 1:
        raise RatioViolation(f"a must lie in (0, 1), got {a}")
    rho = abs(sigma_ij) / math.sqrt(sigma_ii * sigma_jj)
    if not rho < a:
        raise RatioViolation(f"|rho| = {rho:g} is not below a = {a:g}")
    fk = FkStarFunction(g, breakpoints, quad)
    g1 = _real(fk(1, sigma_ii / 2) * fk(1, sigma_jj / 2), "G*_1")
    g2 = _real(fk(2, sigma_ii / 2) * fk(2, sigma_jj / 2), "G*_2")
    rem = _cube(sigma_ij) * bound * bound / (math.pi**2 * math.sqrt(sigma_ii * sigma_jj) * (1 - a))
    return SecondOrderEstimate(g1, 0.5 * g2, rem, "fourier", sigma_ij)


def lorentzian_a(z: float) -> float:
    """``F*_2(z/2)`` for ``f = 1/(1+x^2)``, ``g = pi exp(-|y|)``.

    ``-int_0^inf y^2 exp(-y - y^2 z/2) dy
    = (1/z^2) (1 - (1+z) sqrt(pi/(2z)) exp(1/(2z)) erfc(1/sqrt(2z)))``,
    so ``G*_2 = A(s_ii) A(s_jj)``.
    """
    if not z > 0:
        raise InputError("z must be positive")
    u = 1.0 / math.sqrt(2 * z)
    # exp(u^2) erfc(u) is erfcx(u)
    return (1.0 - (1.0 + z) * math.sqrt(math.pi / (2 * z)) * special.erfcx(u)) / (z * z)


def lorentzian_a_printed(z: float) -> float:
    """The commonly printed closed form ``(1/z)(1 - pi (1+z)/sqrt(2z) e^(1/2) erfc(1/sqrt(2z)))``.

    Disagrees with direct quadrature of ``F*_2``; kept for comparison only.
    """
    return (1.0 - math.pi * (1.0 + z) / math.sqrt(2 * z) * math.exp(0.5) * math.erfc(1 / math.sqrt(2 * z))) / z
