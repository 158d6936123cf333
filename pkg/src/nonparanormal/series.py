"""Mean and covariance of smooth transforms by power series in ``s_ij``.

With ``F_k(x) = sum_u f^(2u+k)(0) x^u / u!`` the mean is ``F_0(s_ii/2)`` and

    tau_ij = sum_{k>=1} F_ki(s_ii/2) F_kj(s_jj/2) s_ij^k / k!.

Truncation errors come from the growth condition ``|f^(a)(0)| <= C K^a``.
"""

from __future__ import annotations

import math

from .core import SeriesControl, Taylor
from .errors import InputError, MaxTermsExceeded, SeriesDivergence

__all__ = ["FkFunction", "nu_series", "tau_series", "tau_diag_series"]

_LOG_TINY = -745.0


def _exp(log_value):
    return math.exp(log_value) if log_value > _LOG_TINY else 0.0


class FkFunction:
    """``F_k(x) = sum_{u>=0} f^(2u+k)(0) x^u / u!`` for a Taylor transform.

    After ``U+1`` terms the remainder is at most
    ``C K^k (K^2 |x|)^(U+1) / (U+1)! * exp(K^2 |x|)``; summation stops once
    that falls below the tolerance. Polynomials terminate with zero error.

    ``trace`` holds the partial sums of the most recent evaluation.
    """

    def __init__(self, f: Taylor, k: int):
        if k < 0:
            raise InputError("shift index k must be nonnegative")
        self.f = f
        self.k = k
        self.trace: list[float] = []

    def __call__(self, x: float, ctl: SeriesControl | None = None):
        """Return ``(value, err)``."""
        ctl = ctl or SeriesControl()
        f, k = self.f, self.k
        self.trace = []
        if x == 0.0:
            self.trace.append(f.derivative(k))
            return self.trace[-1], 0.0
        log_c = math.log(f.C) + k * math.log(f.K)
        rate = f.K * f.K * abs(x)
        terms = []
        log_xu = 0.0
        for u in range(ctl.max_terms):
            a = 2 * u + k
            if f.degree is not None and a > f.degree:
                self.trace.append(math.fsum(terms))
                return self.trace[-1], 0.0
            terms.append(f.derivative(a) * _exp(log_xu - math.lgamma(u + 1)) * (1 if x > 0 or u % 2 == 0 else -1))
            log_xu += math.log(abs(x))
            partial = math.fsum(terms)
            self.trace.append(partial)
            log_tail = log_c + (u + 1) * math.log(rate) - math.lgamma(u + 2) + rate
            tail = _exp(log_tail)
            if tail <= ctl.rel_tol * abs(partial) + ctl.abs_tol:
                return partial, tail
        raise MaxTermsExceeded(f"F_{k}({x:g}) for {f.name} needs more than {ctl.max_terms} terms")


def nu_series(f: Taylor, sigma_ii: float, ctl: SeriesControl | None = None):
    """Mean ``E[f(X)] = F_0(s_ii/2)`` for ``X ~ N(0, s_ii)``; returns ``(nu, err)``."""
    if sigma_ii < 0:
        raise InputError("variance must be nonnegative")
    return FkFunction(f, 0)(sigma_ii / 2, ctl)


def tau_series(
    f_i: Taylor,
    f_j: Taylor,
    sigma_ii: float,
    sigma_jj: float,
    sigma_ij: float,
    ctl: SeriesControl | None = None,
):
    """Covariance ``tau_ij`` as a power series in ``s_ij``.

    Inner ``F_k`` sums and the outer sum each get half of the tolerances.
    The outer tail after ``K`` terms is bounded by

        C_i C_j exp(K_i^2 s_ii/2 + K_j^2 s_jj/2)
        * (K_i K_j |s_ij|)^(K+1) / (K+1)! * exp(K_i K_j |s_ij|).

    Past ``k = 2 K_i K_j max(s)`` every term must sit inside that envelope,
    otherwise :class:`SeriesDivergence` is raised.

    Returns
    -------
    tau : float
    err : float
        Outer tail bound plus propagated inner truncation bounds.
    """
    ctl = ctl or SeriesControl()
    if sigma_ii < 0 or sigma_jj < 0:
        raise InputError("variances must be nonnegative")
    if sigma_ij == 0.0 or sigma_ii == 0.0 or sigma_jj == 0.0:
        return 0.0, 0.0
    half = ctl.split()
    xi, xj = sigma_ii / 2, sigma_jj / 2
    kk = f_i.K * f_j.K
    log_env0 = (
        math.log(f_i.C)
        + math.log(f_j.C)
        + f_i.K**2 * xi
        + f_j.K**2 * xj
    )
    log_s = math.log(abs(sigma_ij))
    log_rate = math.log(kk) + log_s
    guard_from = 2.0 * kk * max(sigma_ii, sigma_jj, abs(sigma_ij))
    k_stop = None
    if f_i.degree is not None and f_j.degree is not None:
        k_stop = min(f_i.degree, f_j.degree)

    terms, inner_err = [], []
    for k in range(1, ctl.max_terms + 1):
        if k_stop is not None and k > k_stop:
            return math.fsum(terms), math.fsum(inner_err)
        a, ea = FkFunction(f_i, k)(xi, half)
        b, eb = FkFunction(f_j, k)(xj, half)
        weight = _exp(k * log_s - math.lgamma(k + 1))
        if sigma_ij < 0 and k % 2:
            weight = -weight
        term = a * b * weight
        terms.append(term)
        inner_err.append(abs(weight) * (abs(a) * eb + abs(b) * ea + ea * eb))
        log_env = log_env0 + k * log_rate - math.lgamma(k + 1)
        if k > guard_from and abs(term) > _exp(log_env) * (1 + 1e-9) + inner_err[-1]:
            raise SeriesDivergence(
                f"term {k} of tau({f_i.name}, {f_j.name}) exceeds its growth envelope"
            )
        if k_stop is not None:
            continue
        partial = math.fsum(terms)
        tail = _exp(log_env0 + (k + 1) * log_rate - math.lgamma(k + 2) + kk * abs(sigma_ij))
        if tail <= half.rel_tol * abs(partial) + half.abs_tol:
            return partial, tail + math.fsum(inner_err)
    if k_stop is not None:
        return math.fsum(terms), math.fsum(inner_err)
    raise MaxTermsExceeded(
        f"tau({f_i.name}, {f_j.name}) not converged after {ctl.max_terms} terms"
    )


def tau_diag_series(f: Taylor, sigma_ii: float, ctl: SeriesControl | None = None):
    """Variance ``tau_ii``: the covariance series with ``s_ij := s_ii``."""
    return tau_series(f, f, sigma_ii, sigma_ii, sigma_ii, ctl)
