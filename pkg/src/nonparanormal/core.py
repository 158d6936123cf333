"""Domain types shared by every method module.

A :class:`GaussianSpec` holds the covariance of ``X``. Each coordinate
transform ``f_i`` is described by one of five representations
(:class:`Catalog`, :class:`Taylor`, :class:`FourierTransform`,
:class:`FourierSeries`, :class:`Laplace`); the alias :data:`FunctionSpec`
names their union. Results come back as a :class:`MomentReport`.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from .errors import (
    ConstraintViolation,
    GrowthViolation,
    InputError,
    NotPositiveDefinite,
    NotSymmetric,
    UnsupportedRepresentation,
)

__all__ = [
    "GaussianSpec",
    "validate_gaussian",
    "SeriesControl",
    "Catalog",
    "Taylor",
    "FourierTransform",
    "FourierSeries",
    "Laplace",
    "FunctionSpec",
    "MomentReport",
    "METHODS",
    "odd_even_split",
    "tau_bilinear_combine",
]

METHODS = (
    "series",
    "fourier_integral",
    "fourier_series",
    "laplace",
    "quadrature",
    "monte_carlo",
    "catalog",
)


# ---------------------------------------------------------------------------
# Gaussian input
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianSpec:
    """Validated covariance of the zero-mean Gaussian vector ``X``.

    Build through :func:`validate_gaussian`; the constructor trusts its
    arguments.
    """

    sigma: np.ndarray
    cholesky: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def pair(self, i: int, j: int) -> tuple[float, float, float]:
        """Return ``(sigma_ii, sigma_jj, sigma_ij)``."""
        s = self.sigma
        return float(s[i, i]), float(s[j, j]), float(s[i, j])

    def d(self, i: int, j: int) -> float:
        s_ii, s_jj, s_ij = self.pair(i, j)
        return s_ii * s_jj - s_ij * s_ij

    def c(self, i: int, j: int) -> float:
        """Normalising constant ``1 / (2 pi sqrt(d))`` of the bivariate density."""
        return 1.0 / (2.0 * math.pi * math.sqrt(self.d(i, j)))


def validate_gaussian(sigma) -> GaussianSpec:
    """Check that ``sigma`` is a symmetric positive definite covariance.

    Symmetry is checked exactly as stored. Positive definiteness is decided
    by whether a Cholesky factorisation succeeds; the factor is kept for
    sampling.

    Raises
    ------
    NotSymmetric
        If ``sigma[i, j] != sigma[j, i]`` for some pair.
    NotPositiveDefinite
        If the Cholesky factorisation fails. The smallest eigenvalue is
        attached to the exception.
    """
    s = np.array(sigma, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] == 0:
        raise InputError(f"covariance must be a non-empty square matrix, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InputError("covariance contains non-finite entries")
    if not np.array_equal(s, s.T):
        bad = np.argwhere(s != s.T)[0]
        raise NotSymmetric(f"sigma[{bad[0]}][{bad[1]}] != sigma[{bad[1]}][{bad[0]}]")
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError:
        lam = float(np.linalg.eigvalsh(s)[0])
        raise NotPositiveDefinite(
            f"covariance is not positive definite (smallest eigenvalue {lam:.6g})", lam
        ) from None
    n = s.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if s[i, i] * s[j, j] - s[i, j] ** 2 <= 0.0:
                raise NotPositiveDefinite(f"d <= 0 for pair ({i}, {j})")
    s.setflags(write=False)
    chol.setflags(write=False)
    return GaussianSpec(sigma=s, cholesky=chol)


# ---------------------------------------------------------------------------
# Controls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_terms: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise InputError("rel_tol and abs_tol must be positive")
        if int(self.max_terms) != self.max_terms or self.max_terms < 2:
            raise InputError("max_terms must be an integer >= 2")

    def split(self) -> "SeriesControl":
        """Control for the inner series when the tolerance is shared evenly."""
        return SeriesControl(self.rel_tol / 2, self.abs_tol / 2, self.max_terms)


# ---------------------------------------------------------------------------
# Function representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Catalog:
    """One of the fourteen tabulated transforms, by id with its parameters.

    ``a`` scales the argument (rows 3-6, 8) or is the width of the Gaussian
    bump (row 11; ``b`` is the partner's width, defaulting to ``a``).
    ``n`` is the power index of rows 9 and 10.
    """

    entry: int
    a: float | None = None
    b: float | None = None
    n: int | None = None

    def __post_init__(self):
        from .catalog import check_entry

        check_entry(self)


class Taylor:
    """A smooth transform known through its derivatives at zero.

    Parameters
    ----------
    coeff : callable
        ``a -> f^(a)(0)``. Must be pure; values are memoised.
    C, K : float
        Growth constants with ``|f^(a)(0)| <= C * K**a`` for every ``a``.
        The bound is checked whenever a coefficient is fetched.
    degree : int, optional
        For polynomials, the largest index with a nonzero derivative. Series
        then terminate and report zero truncation error.
    func : callable, optional
        Vectorised pointwise evaluator, used by quadrature and Monte Carlo.
        When absent the Taylor series itself is summed.
    """

    def __init__(self, coeff, C, K, degree=None, func=None, name="taylor"):
        if not (C > 0 and K > 0):
            raise InputError("growth constants C and K must be positive")
        self.coeff = coeff
        self.C = float(C)
        self.K = float(K)
        self.degree = None if degree is None else int(degree)
        self.func = func
        self.name = name
        self._cache: dict[int, float] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"Taylor({self.name!r}, C={self.C:g}, K={self.K:g}, degree={self.degree})"

    def derivative(self, a: int) -> float:
        """``f^(a)(0)``, memoised and checked against the growth bound."""
        try:
            return self._cache[a]
        except KeyError:
            pass
        if self.degree is not None and a > self.degree:
            value = 0.0
        else:
            value = float(self.coeff(a))
            bound = self.C * self.K**a if a * math.log(self.K) < 700 else math.inf
            if not math.isfinite(value) or abs(value) > bound * (1 + 1e-12):
                raise GrowthViolation(
                    f"{self.name}: |f^({a})(0)| = {abs(value):.6g} exceeds C*K^a = {bound:.6g}"
                )
        with self._lock:
            self._cache[a] = value
        return value

    @classmethod
    def polynomial(cls, coefficients, name="polynomial") -> "Taylor":
        """Polynomial from power-basis coefficients ``c_0 + c_1 x + ...``."""
        coefs = [float(c) for c in coefficients]
        while len(coefs) > 1 and coefs[-1] == 0.0:
            coefs.pop()
        derivs = [c * math.factorial(a) for a, c in enumerate(coefs)]
        C = max(max(abs(v) for v in derivs), 1e-300)

        def func(x, _c=tuple(coefs)):
            return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), _c)

        return cls(lambda a: derivs[a], C, 1.0, degree=len(coefs) - 1, func=func, name=name)

    @classmethod
    def zero(cls) -> "Taylor":
        return cls.polynomial([0.0], name="zero")

    def power_coefficient(self, a: int) -> float:
        return self.derivative(a) / math.factorial(a)

    def __call__(self, x):
        if self.func is not None:
            return self.func(x)
        x = np.asarray(x, dtype=float)
        if self.degree is not None:
            coefs = [self.power_coefficient(a) for a in range(self.degree + 1)]
            return np.polynomial.polynomial.polyval(x, coefs)
        # sum the Taylor series until the growth-bound tail is negligible
        r = float(np.max(np.abs(x))) if x.size else 0.0
        total = np.zeros_like(x)
        term_bound = self.C
        a = 0
        while True:
            total = total + self.power_coefficient(a) * x**a
            a += 1
            term_bound *= self.K * r / a
            if a > self.K * r and term_bound < 1e-17 * max(1.0, float(np.max(np.abs(total)))):
                return total
            if a > 5000:
                raise UnsupportedRepresentation(f"{self.name}: Taylor sum too slow at |x|={r:g}")


@dataclass(frozen=True, eq=False)
class FourierTransform:
    """``f(x) = (1/2pi) * integral g(y) exp(-i x y) dy`` with ``|g| <= bound``.

    ``breakpoints`` lists points where ``g`` is not smooth; quadrature splits
    there. ``func`` optionally evaluates ``f`` directly.
    """

    g: Callable
    bound: float
    breakpoints: tuple = ()
    func: Callable | None = None
    name: str = "fourier_transform"

    def __call__(self, x):
        if self.func is None:
            raise UnsupportedRepresentation(f"{self.name}: no pointwise evaluator supplied")
        return self.func(x)


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """``f(x) = sum_n a_n exp(i n x)`` over finitely many ``n``."""

    coefficients: Mapping[int, complex]
    name: str = "fourier_series"

    def __post_init__(self):
        coefs = {int(n): complex(v) for n, v in dict(self.coefficients).items()}
        if not all(np.isfinite(v.real) and np.isfinite(v.imag) for v in coefs.values()):
            raise InputError("Fourier coefficients must be finite")
        object.__setattr__(self, "coefficients", coefs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for n, a in self.coefficients.items():
            out = out + a * np.exp(1j * n * x)
        return out.real


@dataclass(frozen=True, eq=False)
class Laplace:
    """``f(x) = integral_0^inf g(t) exp(-x t) dt`` with ``g`` supported in ``support``.

    ``support`` is either ``T`` (meaning ``[0, T]``) or a pair ``(lo, hi)``
    with ``0 <= lo < hi``.
    """

    g: Callable
    support: float | tuple = 1.0
    func: Callable | None = None
    name: str = "laplace"

    def __post_init__(self):
        s = self.support
        lo, hi = (0.0, float(s)) if np.isscalar(s) else (float(s[0]), float(s[1]))
        if not (0.0 <= lo < hi < math.inf):
            raise InputError(f"Laplace support must satisfy 0 <= lo < hi < inf, got {s!r}")
        object.__setattr__(self, "support", (lo, hi))

    def __call__(self, x):
        if self.func is not None:
            return self.func(x)
        from .quadrature import legendre_panels

        lo, hi = self.support
        t, w = legendre_panels(np.linspace(lo, hi, 17), 40)
        x = np.asarray(x, dtype=float)
        gt = np.asarray(self.g(t), dtype=float)
        return np.exp(-np.multiply.outer(x, t)) @ (w * gt)


FunctionSpec = Union[Catalog, Taylor, FourierTransform, FourierSeries, Laplace]


def pointwise(f: FunctionSpec) -> Callable:
    """Vectorised evaluator ``x -> f(x)`` for any representation."""
    if isinstance(f, Catalog):
        from .catalog import catalog_function

        return catalog_function(f)
    if callable(f):
        return f
    raise UnsupportedRepresentation(f"cannot evaluate {f!r} pointwise")


# ---------------------------------------------------------------------------
# Result
# ---------------------------------------------------------------------------


@dataclass
class MomentReport:
    """Mean vector and covariance matrix of ``Y`` with per-entry provenance."""

    nu: np.ndarray
    tau: np.ndarray
    nu_method: list
    tau_method: list
    nu_error: np.ndarray
    tau_error: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.nu)

    def check(self, rtol: float = 1e-9) -> None:
        """Raise ``NumericalError`` unless ``tau`` looks like a covariance matrix."""
        from .errors import NumericalError

        tau = self.tau
        if not np.array_equal(tau, tau.T):
            raise NumericalError("tau is not symmetric")
        norm = float(np.linalg.norm(tau, 2)) if tau.size else 0.0
        if np.any(np.diag(tau) < -rtol * norm):
            raise NumericalError("tau has a negative diagonal entry")
        lam = float(np.linalg.eigvalsh(tau)[0])
        if lam < -rtol * max(norm, np.finfo(float).tiny):
            raise NumericalError(f"tau is not positive semidefinite (eigenvalue {lam:.3g})")


# ---------------------------------------------------------------------------
# Representation-level identities
# ---------------------------------------------------------------------------


def odd_even_split(f: FunctionSpec) -> tuple[FunctionSpec, FunctionSpec]:
    """Split ``f`` into its odd and even parts at the representation level.

    Taylor coefficients are partitioned by index parity; Fourier series
    coefficients map to ``(a_n - a_-n)/2`` and ``(a_n + a_-n)/2``; catalog
    entries map onto catalog entries where the parts are tabulated.

    Raises
    ------
    UnsupportedRepresentation
        For transform representations held only as callables, and for the
        normal CDF whose odd part is not tabulated.
    """
    if isinstance(f, Taylor):
        def part(parity):
            def coeff(a):
                return f.derivative(a) if a % 2 == parity else 0.0

            func = None
            if f.func is not None:
                sign = -1.0 if parity else 1.0

                def func(x):
                    x = np.asarray(x, dtype=float)
                    return 0.5 * (f.func(x) + sign * f.func(-x))

            suffix = "odd" if parity else "even"
            return Taylor(coeff, f.C, f.K, degree=f.degree, func=func, name=f"{f.name}:{suffix}")

        return part(1), part(0)
    if isinstance(f, FourierSeries):
        keys = set(f.coefficients) | {-n for n in f.coefficients}
        get = f.coefficients.get
        odd = {n: (get(n, 0) - get(-n, 0)) / 2 for n in keys}
        even = {n: (get(n, 0) + get(-n, 0)) / 2 for n in keys}
        return (
            FourierSeries({n: v for n, v in odd.items() if v != 0}, name=f"{f.name}:odd"),
            FourierSeries({n: v for n, v in even.items() if v != 0}, name=f"{f.name}:even"),
        )
    if isinstance(f, Catalog):
        from .catalog import catalog_parity

        return catalog_parity(f)
    raise UnsupportedRepresentation(
        f"odd/even split needs coefficient access; {type(f).__name__} is a callable"
    )


def tau_bilinear_combine(t_ff, t_fg, t_gf, t_gg, c1, c2) -> float:
    """Covariance of ``c1 f + c2 g`` with itself from the four pair covariances."""
    return c1 * c1 * t_ff + c1 * c2 * (t_fg + t_gf) + c2 * c2 * t_gg


def require_unit_variances(sigma_ii, sigma_jj, what):
    if sigma_ii != 1.0 or sigma_jj != 1.0:
        raise ConstraintViolation(f"{what} requires sigma_ii = sigma_jj = 1")
