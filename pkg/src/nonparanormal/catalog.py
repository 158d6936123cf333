"""Closed forms for fourteen common transforms.

Rows are addressed by number (1-14) or by name:

==  ===============  =====================================
 1  ``sin``          sin x
 2  ``cos``          cos x
 3  ``sin_a``        sin(a x)
 4  ``cos_a``        cos(a x)
 5  ``sinh_a``       sinh(a x)
 6  ``cosh_a``       cosh(a x)
 7  ``exp``          e^x
 8  ``exp_a``        e^(a x)
 9  ``even_power``   x^(2n) / (2n)!
10  ``odd_power``    x^(2n+1) / (2n+1)!
11  ``gaussian``     exp(-x^2 / 2a) / sqrt(2 pi a)
12  ``indicator``    indicator of [-1, 1]
13  ``x_indicator``  x times the indicator of [-1, 1]
14  ``normal_cdf``   standard normal CDF
==  ===============  =====================================

Rows 12-14 are tabulated for unit variances only.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .core import Catalog, FourierTransform, SeriesControl, Taylor
from .errors import ConstraintViolation, InputError, MaxTermsExceeded, UnsupportedRepresentation
from .gaussian_kernel import hermite, hermite_e_normalized

__all__ = [
    "NAMES",
    "entry_id",
    "make_entry",
    "check_entry",
    "catalog_tau",
    "catalog_tau_diag",
    "catalog_nu",
    "catalog_function",
    "catalog_breakpoints",
    "catalog_taylor",
    "catalog_transform",
    "catalog_parity",
    "compatible",
    "x_indicator_printed_series",
]

NAMES = {
    1: "sin",
    2: "cos",
    3: "sin_a",
    4: "cos_a",
    5: "sinh_a",
    6: "cosh_a",
    7: "exp",
    8: "exp_a",
    9: "even_power",
    10: "odd_power",
    11: "gaussian",
    12: "indicator",
    13: "x_indicator",
    14: "normal_cdf",
}
_IDS = {v: k for k, v in NAMES.items()}
_SCALED = {3, 4, 5, 6, 8}
_POWER = {9, 10}
_UNIT_ONLY = {12, 13, 14}

# P(|X| <= 1) and 2 phi(1) for standard normal X
_P1 = math.erf(1 / math.sqrt(2))
_TWO_PHI1 = math.sqrt(2 / (math.pi * math.e))


def entry_id(key) -> int:
    """Row number from an int or a row name."""
    if isinstance(key, str):
        if key in _IDS:
            return _IDS[key]
        if key.isdigit():
            key = int(key)
        else:
            raise InputError(f"unknown catalog entry {key!r}")
    if isinstance(key, bool) or not isinstance(key, (int, np.integer)) or not 1 <= key <= 14:
        raise InputError(f"unknown catalog entry {key!r}")
    return int(key)


def make_entry(key, a=None, b=None, n=None) -> Catalog:
    return Catalog(entry_id(key), a=a, b=b, n=n)


def check_entry(e: Catalog) -> None:
    """Validate parameters of a :class:`Catalog` entry.

    Raises
    ------
    InputError
    """
    if e.entry not in NAMES:
        raise InputError(f"catalog entry must be 1..14, got {e.entry!r}")
    if e.entry in _SCALED:
        if e.a is None or not math.isfinite(e.a) or e.a == 0:
            raise InputError(f"row {e.entry} needs a finite nonzero parameter a")
    if e.entry in _POWER:
        if e.n is None or int(e.n) != e.n or e.n < 0:
            raise InputError(f"row {e.entry} needs an integer n >= 0")
    if e.entry == 11:
        if e.a is None or not e.a > 0 or (e.b is not None and not e.b > 0):
            raise InputError("row 11 needs a > 0 (and b > 0 if given)")
    if e.entry not in _SCALED | {11} and (e.a is not None or e.b is not None):
        raise InputError(f"row {e.entry} takes no parameter a or b")
    if e.entry not in _POWER and e.n is not None:
        raise InputError(f"row {e.entry} takes no parameter n")


def _unit(e, sigma_ii, sigma_jj):
    if e.entry in _UNIT_ONLY and (sigma_ii != 1.0 or sigma_jj != 1.0):
        raise ConstraintViolation(f"row {e.entry} ({NAMES[e.entry]}) requires unit variances")


def _a2(e):
    return 1.0 if e.entry in (1, 2, 7) else float(e.a) ** 2


def compatible(e_i: Catalog, e_j: Catalog) -> bool:
    """Whether the pair has a tabulated covariance (same row, same parameters).

    Row 11 is the exception: each side keeps its own width.
    """
    if e_i.entry != e_j.entry:
        return False
    if e_i.entry == 11:
        return True
    return (e_i.a, e_i.n) == (e_j.a, e_j.n)


_HERMITE_TERM_CAP = 20000


def _hermite_budget(rho, ctl):
    """Term budget: at least ``ctl.max_terms``, enough for ``|rho|^K`` to reach the tolerance."""
    r = abs(rho)
    if r >= 1.0:
        return ctl.max_terms
    need = math.ceil(math.log(min(ctl.rel_tol, 0.5) * 1e-3) / math.log(r)) if r > 0 else 1
    return min(max(ctl.max_terms, need), _HERMITE_TERM_CAP)


def _hermite_series(make_coef, variance, rho, ctl, what):
    """``sum_{k>=1} c_k^2 rho^k / k!`` given normalised ``c_k / sqrt(k!)``.

    The normalised squares sum to ``variance``, so the tail after term ``K`` is
    at most ``(variance - partial mass) |rho|^(K+1)``. Terms decay only like
    ``|rho|^k``, so the term budget grows with ``|rho|``.
    """
    if rho == 0.0:
        return 0.0, 0.0
    budget = _hermite_budget(rho, ctl)
    coef_fn = make_coef(hermite_e_normalized(budget, 1.0))
    terms, mass = [], []
    r = abs(rho)
    power = 1.0
    for k in range(1, budget + 1):
        c = coef_fn(k)
        power *= rho
        terms.append(c * c * power)
        mass.append(c * c)
        partial = math.fsum(terms)
        tail = max(variance - math.fsum(mass), 0.0) * r ** (k + 1)
        if c != 0.0 and tail <= ctl.rel_tol * abs(partial) + ctl.abs_tol:
            return partial, tail
    raise MaxTermsExceeded(f"{what} series not converged after {budget} terms")


def _indicator_coef(table):
    def c(k):
        # E[chi He_k] / sqrt(k!) = -2 phi(1) He_{k-1}(1) / sqrt(k!) for even k
        if k % 2:
            return 0.0
        return -_TWO_PHI1 * table[k - 1] / math.sqrt(k)

    return c


def _x_indicator_coef(table):
    def c(k):
        if k % 2 == 0:
            return 0.0
        if k == 1:
            return _P1 - _TWO_PHI1
        # E[x chi He_k] = -2 phi(1) (He_{k-1}(1) + He_{k-2}(1)) for odd k >= 3
        return -_TWO_PHI1 * (table[k - 1] / math.sqrt(k) + table[k - 2] / math.sqrt(k * (k - 1)))

    return c


def x_indicator_printed_series(sigma_ij, terms=40):
    """The widely printed series for ``x * indicator`` at unit variances.

    It drops the ``sigma_ij^3`` term and carries a coefficient that disagrees
    with direct integration; evaluates to about 0.009876 at ``sigma_ij = 1/4``
    against a true covariance of about 0.010517. Kept for comparison only.
    """
    lead = (_P1 - _TWO_PHI1) ** 2 * sigma_ij
    rest = [
        sigma_ij ** (2 * k + 1)
        * (2 * k - 1) ** 2
        / (math.factorial(2 * k + 1) * 2 ** (2 * k - 2))
        * hermite(2 * k - 2, 1 / math.sqrt(2)) ** 2
        for k in range(2, terms)
    ]
    return lead + 2 / (math.pi * math.e) * math.fsum(rest)


def _power_tau(n, odd, sigma_ii, sigma_jj, sigma_ij):
    if not odd and sigma_ij == 0.0:
        return 0.0
    if sigma_ii == 0.0 or sigma_jj == 0.0:
        return 0.0
    ratio = 4 * sigma_ij * sigma_ij / (sigma_ii * sigma_jj)
    if odd:
        ks = range(0, n + 1)
        terms = [ratio**k / (math.factorial(n - k) ** 2 * math.factorial(2 * k + 1)) for k in ks]
        pref = (sigma_ii * sigma_jj) ** n * sigma_ij / 4**n
    else:
        ks = range(1, n + 1)
        terms = [ratio**k / (math.factorial(n - k) ** 2 * math.factorial(2 * k)) for k in ks]
        pref = (sigma_ii * sigma_jj) ** n / 4**n
    return pref * math.fsum(terms)


def catalog_tau(
    entry: Catalog,
    sigma_ii: float,
    sigma_jj: float,
    sigma_ij: float,
    ctl: SeriesControl | None = None,
    partner: Catalog | None = None,
):
    """Tabulated covariance ``tau_ij`` for ``f_i = f_j = entry``.

    ``partner`` supplies ``f_j`` when it differs; only row 11 allows a
    different width (also settable as ``entry.b``).

    Returns
    -------
    tau : float
    err : float
        Zero for closed forms, a tail bound for rows 12 and 13.

    Raises
    ------
    ConstraintViolation
        Variances other than one for rows 12-14, or an untabulated pair.
    """
    ctl = ctl or SeriesControl()
    e = entry
    if partner is not None and not compatible(e, partner):
        raise ConstraintViolation(f"no tabulated covariance for {e} with {partner}")
    _unit(e, sigma_ii, sigma_jj)
    row = e.entry
    s_i, s_j, s = sigma_ii, sigma_jj, sigma_ij
    if row in (1, 3):
        a2 = _a2(e)
        return math.exp(-a2 * (s_i + s_j) / 2) * math.sinh(a2 * s), 0.0
    if row in (2, 4):
        a2 = _a2(e)
        return math.exp(-a2 * (s_i + s_j) / 2) * 2 * math.sinh(a2 * s / 2) ** 2, 0.0
    if row == 5:
        a2 = _a2(e)
        return math.exp(a2 * (s_i + s_j) / 2) * math.sinh(a2 * s), 0.0
    if row == 6:
        a2 = _a2(e)
        return math.exp(a2 * (s_i + s_j) / 2) * 2 * math.sinh(a2 * s / 2) ** 2, 0.0
    if row in (7, 8):
        a2 = _a2(e)
        return math.exp(a2 * (s_i + s_j) / 2) * math.expm1(a2 * s), 0.0
    if row in (9, 10):
        return _power_tau(int(e.n), row == 10, s_i, s_j, s), 0.0
    if row == 11:
        a = float(e.a)
        b = float(partner.a if partner is not None else (e.b if e.b is not None else e.a))
        p = (a + s_i) * (b + s_j)
        # p^(-1/2) ((1 - s^2/p)^(-1/2) - 1) without cancellation
        x = -s * s / p
        return math.expm1(-0.5 * math.log1p(x)) / math.sqrt(p) / (2 * math.pi), 0.0
    if row == 12:
        return _hermite_series(_indicator_coef, _P1 - _P1**2, s, ctl, "indicator")
    if row == 13:
        return _hermite_series(
            _x_indicator_coef, _P1 - _TWO_PHI1, s, ctl, "x_indicator"
        )
    if row == 14:
        return math.asin(s / 2) / (2 * math.pi), 0.0
    raise AssertionError(row)


def catalog_tau_diag(entry: Catalog, sigma_ii: float, ctl: SeriesControl | None = None):
    """Tabulated variance ``tau_ii``; returns ``(tau, err)``.

    Rows 12-14 use their own closed forms; every other row is the covariance
    formula at ``s_ij = s_jj = s_ii`` (row 11 with ``b = a``).
    """
    _unit(entry, sigma_ii, sigma_ii)
    row = entry.entry
    if row == 12:
        return _P1 - _P1 * _P1, 0.0
    if row == 13:
        return _P1 - _TWO_PHI1, 0.0
    if row == 14:
        return 1.0 / 12.0, 0.0
    if row == 11:
        entry = Catalog(11, a=entry.a)
    return catalog_tau(entry, sigma_ii, sigma_ii, sigma_ii, ctl)


def catalog_nu(entry: Catalog, sigma_ii: float) -> float:
    """Mean ``E[f(X)]`` for ``X ~ N(0, s_ii)``."""
    _unit(entry, sigma_ii, sigma_ii)
    row = entry.entry
    if row in (1, 3, 5, 10, 13):
        return 0.0
    if row in (2, 4):
        return math.exp(-_a2(entry) * sigma_ii / 2)
    if row in (6, 7, 8):
        return math.exp(_a2(entry) * sigma_ii / 2)
    if row == 9:
        n = int(entry.n)
        return sigma_ii**n / (2**n * math.factorial(n))
    if row == 11:
        return 1.0 / math.sqrt(2 * math.pi * (float(entry.a) + sigma_ii))
    if row == 12:
        return math.erf(1 / math.sqrt(2 * sigma_ii))
    if row == 14:
        return 0.5
    raise AssertionError(row)


def catalog_function(entry: Catalog):
    """Vectorised pointwise evaluator of the row's ``f``."""
    row = entry.entry
    a = 1.0 if entry.a is None else float(entry.a)
    if row in (1, 3):
        return lambda x: np.sin(a * np.asarray(x, dtype=float))
    if row in (2, 4):
        return lambda x: np.cos(a * np.asarray(x, dtype=float))
    if row == 5:
        return lambda x: np.sinh(a * np.asarray(x, dtype=float))
    if row == 6:
        return lambda x: np.cosh(a * np.asarray(x, dtype=float))
    if row in (7, 8):
        return lambda x: np.exp(a * np.asarray(x, dtype=float))
    if row in (9, 10):
        p = 2 * int(entry.n) + (row == 10)
        fact = float(math.factorial(p))
        return lambda x: np.asarray(x, dtype=float) ** p / fact
    if row == 11:
        norm = 1.0 / math.sqrt(2 * math.pi * a)
        return lambda x: norm * np.exp(-np.asarray(x, dtype=float) ** 2 / (2 * a))
    if row == 12:
        return lambda x: (np.abs(np.asarray(x, dtype=float)) <= 1.0).astype(float)
    if row == 13:
        def f(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) <= 1.0, x, 0.0)

        return f
    if row == 14:
        return lambda x: special.ndtr(np.asarray(x, dtype=float))
    raise AssertionError(row)


def catalog_breakpoints(entry: Catalog) -> tuple:
    """Points where the row's ``f`` jumps."""
    return (-1.0, 1.0) if entry.entry in (12, 13) else ()


_CYCLE = {
    1: (0.0, 1.0, 0.0, -1.0),
    2: (1.0, 0.0, -1.0, 0.0),
    3: (0.0, 1.0, 0.0, -1.0),
    4: (1.0, 0.0, -1.0, 0.0),
    5: (0.0, 1.0, 0.0, 1.0),
    6: (1.0, 0.0, 1.0, 0.0),
    7: (1.0, 1.0, 1.0, 1.0),
    8: (1.0, 1.0, 1.0, 1.0),
}


def catalog_taylor(entry: Catalog) -> Taylor:
    """Taylor representation of rows 1-10 (``C = 1``, ``K = |a|``)."""
    row = entry.entry
    name = NAMES[row]
    func = catalog_function(entry)
    if row in _CYCLE:
        a = 1.0 if entry.a is None else float(entry.a)
        cycle = _CYCLE[row]
        return Taylor(lambda k: cycle[k % 4] * a**k, 1.0, abs(a), func=func, name=name)
    if row in _POWER:
        p = 2 * int(entry.n) + (row == 10)
        return Taylor(lambda k: 1.0 if k == p else 0.0, 1.0, 1.0, degree=p, func=func, name=name)
    raise UnsupportedRepresentation(f"row {row} ({name}) has no Taylor representation")


def _sinc2(y):
    y = np.asarray(y, dtype=float)
    safe = np.where(y == 0.0, 1.0, y)
    return np.where(y == 0.0, 2.0, 2.0 * np.sin(safe) / safe)


def _x_indicator_g(y):
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-2
    safe = np.where(small, 1.0, y)
    big = 2.0 * (np.sin(safe) - safe * np.cos(safe)) / safe**2
    y2 = y * y
    series = y * (2.0 / 3 - y2 / 15 + y2 * y2 / 420 - y2**3 / 22680)
    return 1j * np.where(small, series, big)


def catalog_transform(entry: Catalog) -> FourierTransform:
    """Fourier representation ``f(x) = (1/2pi) int g(y) exp(-i x y) dy`` of rows 11-13."""
    row = entry.entry
    func = catalog_function(entry)
    if row == 11:
        a = float(entry.a)
        return FourierTransform(lambda y: np.exp(-a * np.asarray(y, dtype=float) ** 2 / 2), 1.0, func=func, name="gaussian")
    if row == 12:
        return FourierTransform(_sinc2, 2.0, func=func, name="indicator")
    if row == 13:
        return FourierTransform(_x_indicator_g, 1.0, func=func, name="x_indicator")
    raise UnsupportedRepresentation(f"row {row} ({NAMES[row]}) has no bounded Fourier representation")


def catalog_parity(entry: Catalog):
    """Odd and even parts, as catalog entries or Taylor zeros.

    ``e^(ax)`` splits into ``sinh(ax)`` and ``cosh(ax)``; the normal CDF's odd
    part ``Phi - 1/2`` is not tabulated.
    """
    row = entry.entry
    if row in (7, 8):
        a = 1.0 if entry.a is None else entry.a
        return Catalog(5, a=a), Catalog(6, a=a)
    if row == 14:
        raise UnsupportedRepresentation("the normal CDF is neither odd nor even and its parts are not tabulated")
    if row in (1, 3, 5, 10, 13):
        return entry, Taylor.zero()
    return Taylor.zero(), entry
