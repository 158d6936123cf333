"""Covariances of transforms given as Fourier integrals, Fourier series or
Laplace transforms.

For ``f(x) = (1/2pi) * integral g(y) exp(-i x y) dy`` the covariance is the
double integral

    tau_ij = (1/4pi^2) ** g_i(y) g_j(z) (exp(-y z s_ij) - 1)
             * exp(-(y^2 s_ii + z^2 s_jj) / 2) dy dz,

evaluated here by tensor Gauss-Hermite quadrature, or expanded in powers of
``s_ij`` with coefficients ``F*_k(s_ii/2) F*_k(s_jj/2) / k!``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .core import SeriesControl
from .errors import (
    ConvergenceDomainViolation,
    DomainError,
    ImaginaryResidue,
    InputError,
    MaxTermsExceeded,
    QuadratureNotConverged,
)
from .quadrature import ROUNDING, QuadConfig, gauss_hermite, legendre_panels

__all__ = [
    "FkStarFunction",
    "tau_fourier_integral",
    "tau_fourier_series_expansion",
    "tau_fourier_coefficients",
    "tau_laplace",
    "tau_normal_to_uniform",
    "kruskal_correlation",
    "nu_fourier_transform",
    "nu_fourier_coefficients",
    "nu_laplace",
]

# (-i)**k, indexed by k mod 4; multiplying by these is exact
_PHASE = (1 + 0j, -1j, -1 + 0j, 1j)
_IMAG_TOL = 1e-10


def _real(value, what, scale=1.0):
    value = complex(value)
    if abs(value.imag) > _IMAG_TOL * max(1.0, abs(value.real), scale):
        raise ImaginaryResidue(f"{what}: imaginary residue {value.imag:.3g}")
    return value.real


def _eval_g(g, y):
    return np.asarray(g(y), dtype=complex)


class FkStarFunction:
    """``F*_k(x) = (1/2pi) (-i)^k integral g(y) y^k exp(-y^2 x) dy``.

    Evaluated with Gauss-Hermite after ``y = t / sqrt(x)``, with node doubling.
    When ``breakpoints`` are given (``g`` has kinks or jumps) adaptive
    quadrature split at those points is used instead.

    Values are kept as ``mantissa * exp(log_scale)`` so that high orders do
    not overflow.
    """

    def __init__(self, g, breakpoints=(), quad: QuadConfig | None = None):
        self.g = g
        self.breakpoints = tuple(sorted(float(b) for b in breakpoints))
        self.quad = quad or QuadConfig()
        self._cache = {}

    def bound(self, k: int, x: float, g_bound: float) -> float:
        """``(N/2pi) Gamma((k+1)/2) x^(-(k+1)/2)`` for ``|g| <= N``."""
        return math.exp(self.log_bound(k, x, g_bound))

    @staticmethod
    def log_bound(k, x, g_bound):
        return (
            math.log(g_bound / (2 * math.pi))
            + math.lgamma((k + 1) / 2)
            - (k + 1) / 2 * math.log(x)
        )

    def scaled(self, k: int, x: float):
        """Return ``(mantissa, log_scale, abs_err)`` with value ``mantissa * exp(log_scale)``.

        ``abs_err`` is in mantissa units.
        """
        key = (k, x)
        if key not in self._cache:
            if x <= 0:
                raise InputError("F*_k needs x > 0")
            if self.breakpoints:
                self._cache[key] = self._adaptive(k, x)
            else:
                self._cache[key] = self._hermite(k, x)
        return self._cache[key]

    def __call__(self, k: int, x: float) -> complex:
        m, s, _ = self.scaled(k, x)
        return m * math.exp(s)

    def _hermite_once(self, k, x, n):
        t, lw = gauss_hermite(n)
        pos = t > 0
        tp, lwp = t[pos], lw[pos]
        root = math.sqrt(x)
        with np.errstate(divide="ignore"):
            log_mag = lwp + k * np.log(tp)
        s = float(np.max(log_mag))
        e = np.exp(log_mag - s)
        gp = _eval_g(self.g, tp / root)
        gm = _eval_g(self.g, -tp / root)
        sign = -1.0 if k % 2 else 1.0
        folded = e * (gp + sign * gm)
        mass = float(np.sum(e * (np.abs(gp) + np.abs(gm))))
        total = complex(np.sum(folded))
        if n % 2 and k == 0:
            c = math.exp(lw[n // 2] - s)
            g0 = complex(_eval_g(self.g, np.zeros(1))[0])
            total += c * g0
            mass += c * abs(g0)
        log_scale = s - (k + 1) / 2 * math.log(x) - math.log(2 * math.pi)
        return _PHASE[k % 4] * total, log_scale, mass

    def _hermite(self, k, x):
        q = self.quad
        n = q.nodes
        while n < k:
            n *= 2
        n_max = max(q.max_nodes, 4 * n)
        prev = None
        while n <= n_max:
            m, s, mass = self._hermite_once(k, x, n)
            if prev is not None:
                pm, ps, _ = prev
                delta = abs(m - pm * math.exp(ps - s))
                if delta <= q.rel_tol * abs(m) + q.abs_tol * mass:
                    return m, s, delta
            prev = (m, s, mass)
            n *= 2
        raise QuadratureNotConverged(f"F*_{k}({x:g}) did not converge by {n_max} nodes")

    def _adaptive(self, k, x):
        pts = (-math.inf,) + self.breakpoints + (math.inf,)
        total, err = 0j, 0.0
        for part in (np.real, np.imag):
            def integrand(y):
                return float(part(complex(self.g(y)))) * y**k * math.exp(-y * y * x)

            for lo, hi in zip(pts[:-1], pts[1:]):
                val, e = integrate.quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=400)
                total += val if part is np.real else 1j * val
                err += e
        value = _PHASE[k % 4] * total / (2 * math.pi)
        return value, 0.0, err / (2 * math.pi)


def _pair_rho(sigma_ii, sigma_jj, sigma_ij):
    if sigma_ii <= 0 or sigma_jj <= 0:
        raise InputError("variances must be positive")
    return sigma_ij / math.sqrt(sigma_ii * sigma_jj)


def tau_fourier_integral(g_i, g_j, sigma_ii, sigma_jj, sigma_ij, quad: QuadConfig | None = None):
    """Covariance from the Fourier double integral by tensor Gauss-Hermite.

    ``exp(-y^2 s_ii / 2)`` is absorbed into the Hermite weight through
    ``y = t sqrt(2/s_ii)`` (likewise ``z``); the coupling
    ``exp(-y z s_ij) - 1`` stays in the integrand. The node count doubles
    until two successive results agree.

    Returns
    -------
    tau : float
    err : float
        Difference between the last two refinements plus a rounding
        allowance on the absolute integrand mass.
    """
    quad = quad or QuadConfig()
    if sigma_ij == 0.0:
        return 0.0, 0.0
    rho = _pair_rho(sigma_ii, sigma_jj, sigma_ij)
    jac = 2.0 / math.sqrt(sigma_ii * sigma_jj) / (4 * math.pi**2)
    prev = None
    for n in quad.schedule():
        t, lw = gauss_hermite(n)
        gi = _eval_g(g_i, t * math.sqrt(2.0 / sigma_ii))
        gj = _eval_g(g_j, t * math.sqrt(2.0 / sigma_jj))
        a = lw[:, None] + lw[None, :]
        e = -2.0 * rho * np.multiply.outer(t, t)
        small = np.abs(e) < 1.0
        with np.errstate(over="ignore"):
            coupling = np.where(
                small,
                np.exp(a) * np.expm1(np.where(small, e, 0.0)),
                np.exp(a + e) - np.exp(a),
            )
        val = jac * complex(gi @ coupling @ gj)
        mass = jac * float(np.abs(gi) @ np.abs(coupling) @ np.abs(gj))
        if prev is not None:
            delta = abs(val - prev)
            if delta <= quad.rel_tol * abs(val) + quad.abs_tol * mass:
                return _real(val, "tau_fourier_integral", mass), delta + ROUNDING * mass
        prev = val
    raise QuadratureNotConverged(
        f"Fourier double integral did not converge by {quad.max_nodes} nodes (rho={rho:.3g})"
    )


def tau_fourier_series_expansion(
    g_i,
    g_j,
    bound_i,
    bound_j,
    sigma_ii,
    sigma_jj,
    sigma_ij,
    ctl: SeriesControl | None = None,
    quad: QuadConfig | None = None,
    breakpoints_i=(),
    breakpoints_j=(),
):
    """Covariance as the power series ``sum_k F*_ki(s_ii/2) F*_kj(s_jj/2) s_ij^k / k!``.

    The tail is bounded with ``|F*_k(x)| <= (N/2pi) Gamma((k+1)/2) x^(-(k+1)/2)``;
    successive bound terms shrink at least by the correlation ``|rho|``, so
    the tail after term ``K`` is at most ``b_{K+1} / (1 - |rho|)``.

    Raises
    ------
    ConvergenceDomainViolation
        If ``s_ij^2 >= s_ii s_jj (1 - 1e-12)``.
    MaxTermsExceeded
        If the tail bound is not met within ``ctl.max_terms`` terms.
    """
    ctl = ctl or SeriesControl()
    quad = quad or QuadConfig()
    if sigma_ij == 0.0:
        return 0.0, 0.0
    if sigma_ij * sigma_ij >= sigma_ii * sigma_jj * (1 - 1e-12):
        raise ConvergenceDomainViolation(
            "series needs sigma_ij^2 < sigma_ii * sigma_jj strictly"
        )
    rho = abs(_pair_rho(sigma_ii, sigma_jj, sigma_ij))
    fi = FkStarFunction(g_i, breakpoints_i, quad)
    fj = FkStarFunction(g_j, breakpoints_j, quad)
    xi, xj = sigma_ii / 2, sigma_jj / 2
    log_abs_s = math.log(abs(sigma_ij))
    sign = -1.0 if sigma_ij < 0 else 1.0

    def log_tail_term(k):
        return (
            FkStarFunction.log_bound(k, xi, bound_i)
            + FkStarFunction.log_bound(k, xj, bound_j)
            + k * log_abs_s
            - math.lgamma(k + 1)
        )

    terms = []
    quad_err = 0.0
    for k in range(1, ctl.max_terms + 1):
        mi, si, ei = fi.scaled(k, xi)
        mj, sj, ej = fj.scaled(k, xj)
        log_w = si + sj + k * log_abs_s - math.lgamma(k + 1)
        w = math.exp(log_w) * sign**k if log_w > -745 else 0.0
        terms.append(mi * mj * w)
        quad_err += abs(w) * (abs(mi) * ej + abs(mj) * ei + ei * ej)
        partial = sum(terms)
        tail = math.exp(log_tail_term(k + 1)) / (1 - rho)
        if tail <= ctl.rel_tol * abs(partial) + ctl.abs_tol:
            total = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
            return _real(total, "tau_fourier_series_expansion"), tail + quad_err
    raise MaxTermsExceeded(
        f"Fourier power series not converged after {ctl.max_terms} terms (|rho|={rho:.3g})"
    )


def tau_fourier_coefficients(a_i, a_j, sigma_ii, sigma_jj, sigma_ij, exponent="variance"):
    """Covariance of two finite Fourier series.

    ``tau = sum_n sum_m a_n a_m (exp(-n m s_ij) - 1) exp(-(n^2 s_ii + m^2 s_jj)/2)``,
    since ``E[exp(i(n X_i + m X_j))] = exp(-(n^2 s_ii + 2 n m s_ij + m^2 s_jj)/2)``.

    ``exponent="printed"`` squares the variances in the damping factor, the
    form that circulates in print; it disagrees with direct integration
    whenever a variance differs from one and is kept only for comparison.
    """
    if exponent not in ("variance", "printed"):
        raise InputError("exponent must be 'variance' or 'printed'")
    vi = sigma_ii * sigma_ii if exponent == "printed" else sigma_ii
    vj = sigma_jj * sigma_jj if exponent == "printed" else sigma_jj
    a_i = {int(n): complex(v) for n, v in dict(a_i).items()}
    a_j = {int(n): complex(v) for n, v in dict(a_j).items()}
    re, im = [], []
    for n, an in a_i.items():
        for m, am in a_j.items():
            if n == 0 or m == 0:
                continue
            term = an * am * math.expm1(-n * m * sigma_ij) * math.exp(-(n * n * vi + m * m * vj) / 2)
            re.append(term.real)
            im.append(term.imag)
    scale = math.fsum(abs(complex(r, i)) for r, i in zip(re, im))
    return _real(complex(math.fsum(re), math.fsum(im)), "tau_fourier_coefficients", scale)


def nu_fourier_coefficients(a, sigma_ii):
    """Mean of a Fourier series, ``sum_n a_n exp(-n^2 s_ii / 2)``."""
    a = {int(n): complex(v) for n, v in dict(a).items()}
    re = [(v * math.exp(-n * n * sigma_ii / 2)).real for n, v in a.items()]
    im = [(v * math.exp(-n * n * sigma_ii / 2)).imag for n, v in a.items()]
    return _real(complex(math.fsum(re), math.fsum(im)), "nu_fourier_coefficients")


def nu_fourier_transform(g, sigma_ii, quad: QuadConfig | None = None, breakpoints=()):
    """Mean ``F*_0(s_ii/2) = (1/2pi) integral g(y) exp(-y^2 s_ii/2) dy`` with its error."""
    m, s, e = FkStarFunction(g, breakpoints, quad).scaled(0, sigma_ii / 2)
    return _real(m * math.exp(s), "nu_fourier_transform"), e * math.exp(s)


def _laplace_rule(support, panels, order):
    lo, hi = support
    return legendre_panels(np.linspace(lo, hi, panels + 1), order)


def tau_laplace(
    g_i,
    g_j,
    support_i,
    support_j,
    sigma_ii,
    sigma_jj,
    sigma_ij,
    quad: QuadConfig | None = None,
    formula="mgf",
    panels=16,
):
    """Covariance of two Laplace transforms with compactly supported densities.

    For ``f(x) = integral g(t) exp(-x t) dt`` the Gaussian moment generating
    function gives

        tau = ** g_i(t1) g_j(t2) (exp(t1 t2 s_ij) - 1)
              * exp((t1^2 s_ii + t2^2 s_jj) / 2) dt1 dt2.

    ``formula="printed"`` evaluates the variant
    ``(exp(-t1 t2 s_ij) - 1) exp(-(t1 s_ii + t2 s_jj)/2)`` instead, kept for
    comparison only. Tensor Gauss-Legendre on the support box, per-panel
    order doubling until successive results agree.
    """
    quad = quad or QuadConfig()
    if formula not in ("mgf", "printed"):
        raise InputError("formula must be 'mgf' or 'printed'")
    support_i = _support(support_i)
    support_j = _support(support_j)
    if sigma_ij == 0.0:
        return 0.0, 0.0
    prev = None
    for order in quad.orders:
        t1, w1 = _laplace_rule(support_i, panels, order)
        t2, w2 = _laplace_rule(support_j, panels, order)
        a = w1 * np.asarray(g_i(t1), dtype=float)
        b = w2 * np.asarray(g_j(t2), dtype=float)
        prod = np.multiply.outer(t1, t2)
        if formula == "mgf":
            kernel = np.expm1(prod * sigma_ij) * np.exp(
                0.5 * (sigma_ii * t1[:, None] ** 2 + sigma_jj * t2[None, :] ** 2)
            )
        else:
            kernel = np.expm1(-prod * sigma_ij) * np.exp(
                -0.5 * (sigma_ii * t1[:, None] + sigma_jj * t2[None, :])
            )
        val = float(a @ kernel @ b)
        mass = float(np.abs(a) @ np.abs(kernel) @ np.abs(b))
        if prev is not None:
            delta = abs(val - prev)
            if delta <= quad.rel_tol * abs(val) + quad.abs_tol * mass:
                return val, delta
        prev = val
    raise QuadratureNotConverged("Laplace double integral did not converge")


def nu_laplace(g, support, sigma_ii, quad: QuadConfig | None = None, panels=16):
    """Mean ``integral g(t) exp(t^2 s_ii / 2) dt`` of a Laplace transform."""
    quad = quad or QuadConfig()
    support = _support(support)
    prev = None
    for order in quad.orders:
        t, w = _laplace_rule(support, panels, order)
        val = float(np.sum(w * np.asarray(g(t), dtype=float) * np.exp(0.5 * sigma_ii * t * t)))
        if prev is not None and abs(val - prev) <= quad.rel_tol * abs(val) + quad.abs_tol:
            return val, abs(val - prev)
        prev = val
    raise QuadratureNotConverged("Laplace mean did not converge")


def _support(s):
    if np.isscalar(s):
        return 0.0, float(s)
    lo, hi = float(s[0]), float(s[1])
    if not (0.0 <= lo < hi < math.inf):
        raise InputError(f"bad Laplace support {s!r}")
    return lo, hi


def tau_normal_to_uniform(sigma_ij):
    """Covariance ``arcsin(s_ij / 2) / (2 pi)`` of two standard normal CDFs.

    Valid for unit variances, where ``s_ij`` is the correlation.
    """
    if not -2.0 < sigma_ij < 2.0:
        raise DomainError(f"|sigma_ij| must be < 2, got {sigma_ij}")
    return math.asin(sigma_ij / 2) / (2 * math.pi)


def kruskal_correlation(rho):
    """Correlation ``(6/pi) arcsin(rho/2)`` after mapping both normal marginals to uniform."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {rho}")
    return 6.0 / math.pi * math.asin(rho / 2)
