"""Reference engines: direct quadrature of the moment integrals and a seeded
Monte Carlo estimator.

Both work for any vectorised callable ``f`` and serve as the fallback for
transforms that have no closed-form route, and as arbiters in the tests.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import GaussianSpec, MomentReport
from .errors import DegenerateD, InputError, NonFiniteSample, QuadratureNotConverged
from .quadrature import ROUNDING, QuadConfig, row_panels

__all__ = [
    "McControl",
    "nu_quadrature",
    "tau_diag_quadrature",
    "tau_quadrature",
    "sample_transformed",
    "THREADS_ENV",
]

THREADS_ENV = "NONPARANORMAL_THREADS"
_SQRT_2PI = math.sqrt(2 * math.pi)
_CHUNK = 256


def _window(center, scale, quad: QuadConfig, breakpoints):
    """Panel edges ``center +- half_width * scale`` with breakpoints inserted.

    ``center`` and ``scale`` broadcast to one window per row.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    scale = np.broadcast_to(np.asarray(scale, dtype=float), center.shape)
    n_panels = max(2, int(math.ceil(2 * quad.half_width / quad.panel_width)))
    u = np.linspace(-quad.half_width, quad.half_width, n_panels + 1)
    base = center[:, None] + scale[:, None] * u[None, :]
    extra = None
    if breakpoints:
        extra = np.broadcast_to(np.asarray(breakpoints, dtype=float), (center.size, len(breakpoints)))
    return base, extra


def _gauss_rule(sigma, order, quad, breakpoints):
    """Nodes and weights integrating against the ``N(0, sigma)`` density."""
    scale = math.sqrt(sigma)
    base, extra = _window(0.0, scale, quad, breakpoints)
    x, w = row_panels(base, extra, order)
    x, w = x[0], w[0]
    return x, w * np.exp(-0.5 * x * x / sigma) / (_SQRT_2PI * scale)


def _eval(f, x):
    return np.asarray(f(x), dtype=float)


def _refine(compute, quad: QuadConfig, what):
    prev = None
    for order in quad.orders:
        val, mass = compute(order)
        if prev is not None:
            delta = float(np.max(np.abs(np.asarray(val) - np.asarray(prev))))
            if delta <= quad.oracle_rel_tol * float(np.max(np.abs(val))) + quad.abs_tol * mass:
                return val, delta + ROUNDING * mass
        prev = val
    raise QuadratureNotConverged(f"{what} did not converge at panel order {quad.orders[-1]}")


def nu_quadrature(f, sigma_ii: float, quad: QuadConfig | None = None, breakpoints=()):
    """Mean ``E[f(X)]`` for ``X ~ N(0, s_ii)`` by composite Gauss-Legendre.

    The window is ``+- half_width`` standard deviations, split into panels and
    at any ``breakpoints`` where ``f`` jumps; the per-panel order doubles until
    two successive results agree.

    Returns
    -------
    nu, err : float
    """
    quad = quad or QuadConfig()
    if sigma_ii <= 0:
        raise InputError("variance must be positive")

    def compute(order):
        x, w = _gauss_rule(sigma_ii, order, quad, breakpoints)
        fx = _eval(f, x)
        return float(np.sum(w * fx)), float(np.sum(w * np.abs(fx)))

    return _refine(compute, quad, "mean quadrature")


def tau_diag_quadrature(f, sigma_ii: float, quad: QuadConfig | None = None, breakpoints=()):
    """Variance ``E[f(X)^2] - E[f(X)]^2`` by the same rule as :func:`nu_quadrature`."""
    quad = quad or QuadConfig()
    if sigma_ii <= 0:
        raise InputError("variance must be positive")

    def compute(order):
        x, w = _gauss_rule(sigma_ii, order, quad, breakpoints)
        fx = _eval(f, x)
        nu = float(np.sum(w * fx))
        dev = fx - nu
        return float(np.sum(w * dev * dev)), float(np.sum(w * fx * fx))

    return _refine(compute, quad, "variance quadrature")


_LAYER_STEPS = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)


def _layer_points(breakpoints_j, beta, cond_sd):
    """Graded outer split points around ``x = b / beta`` for each jump ``b`` of ``f_j``.

    The conditional mean of ``f_j`` changes over a layer of width
    ``cond_sd / |beta|`` there, which is thin near perfect correlation.
    """
    if not breakpoints_j or beta == 0.0:
        return ()
    width = cond_sd / abs(beta)
    return tuple(b / beta + sgn * t * width for b in breakpoints_j for t in _LAYER_STEPS for sgn in (-1, 1) if t or sgn > 0)


def tau_quadrature(
    f_i,
    f_j,
    sigma_ii: float,
    sigma_jj: float,
    sigma_ij: float,
    quad: QuadConfig | None = None,
    breakpoints_i=(),
    breakpoints_j=(),
):
    """Covariance ``E[f_i(X_i) f_j(X_j)] - nu_i nu_j`` by iterated quadrature.

    The bivariate density factors as ``N(0, s_ii)`` for ``x`` times
    ``N(s_ij x / s_ii, d / s_ii)`` for ``w`` given ``x``, with
    ``d = s_ii s_jj - s_ij^2``. The inner window follows the conditional mean
    so the rule stays resolved as ``d`` shrinks; both directions are split at
    the breakpoints of the respective ``f``.

    Returns
    -------
    tau, err : float

    Raises
    ------
    DegenerateD
        If ``d <= 0``.
    """
    quad = quad or QuadConfig()
    if sigma_ii <= 0 or sigma_jj <= 0:
        raise InputError("variances must be positive")
    d = sigma_ii * sigma_jj - sigma_ij * sigma_ij
    if not d > 0:
        raise DegenerateD(f"d = s_ii s_jj - s_ij^2 = {d:g} must be positive")
    beta = sigma_ij / sigma_ii
    cond_sd = math.sqrt(d / sigma_ii)
    outer_bp = tuple(breakpoints_i) + _layer_points(breakpoints_j, beta, cond_sd)

    def compute(order):
        x, wx = _gauss_rule(sigma_ii, order, quad, outer_bp)
        xj, wj = _gauss_rule(sigma_jj, order, quad, breakpoints_j)
        nu_j = float(np.sum(wj * _eval(f_j, xj)))
        fx = _eval(f_i, x)
        cond = np.empty_like(x)
        for start in range(0, x.size, _CHUNK):
            xs = x[start : start + _CHUNK]
            base, extra = _window(beta * xs, cond_sd, quad, breakpoints_j)
            w_nodes, w_weights = row_panels(base, extra, order)
            z = (w_nodes - beta * xs[:, None]) / cond_sd
            dens = np.exp(-0.5 * z * z) / (_SQRT_2PI * cond_sd)
            fw = _eval(f_j, w_nodes.ravel()).reshape(w_nodes.shape)
            cond[start : start + _CHUNK] = np.sum(w_weights * dens * fw, axis=1)
        dev = cond - nu_j
        tau = float(np.sum(wx * fx * dev))
        # cancellation in cond - nu_j sets the noise floor, so scale by the uncancelled size
        return tau, float(np.sum(wx * np.abs(fx) * (np.abs(cond) + abs(nu_j))))

    return _refine(compute, quad, "covariance quadrature")


@dataclass(frozen=True)
class McControl:
    """Monte Carlo settings.

    ``samples`` draws of ``X`` are generated in blocks of ``block`` rows; block
    ``b`` is drawn from a Philox stream keyed by ``seed`` with its counter's
    top word set to ``b``, so results do not depend on scheduling.
    """

    samples: int = 10**6
    seed: int = 0
    antithetic: bool = False
    block: int = 2**16

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 2:
            raise InputError("samples must be an integer >= 2")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.block < 2 or (self.antithetic and self.block % 2):
            raise InputError("block must be >= 2 (and even for antithetic draws)")


def _threads(threads):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def _block_draws(spec: GaussianSpec, mc: McControl, b: int, rows: int):
    bitgen = np.random.Philox(key=mc.seed, counter=[0, 0, 0, b])
    gen = np.random.Generator(bitgen)
    if mc.antithetic:
        z = gen.standard_normal((rows - rows // 2, spec.dim))
        z = np.concatenate([z, -z])[:rows]
    else:
        z = gen.standard_normal((rows, spec.dim))
    return z @ spec.cholesky.T


def _block_values(spec, funcs, mc, b, rows):
    x = _block_draws(spec, mc, b, rows)
    y = np.empty_like(x)
    for k, f in enumerate(funcs):
        y[:, k] = _eval(f, x[:, k])
        bad = ~np.isfinite(y[:, k])
        if bad.any():
            r = int(np.argmax(bad))
            draw = b * mc.block + r
            raise NonFiniteSample(
                f"f_{k} returned {y[r, k]} at draw {draw} (x = {x[r, k]!r})", coordinate=k, draw=draw
            )
    return y


def sample_transformed(spec: GaussianSpec, funcs, mc: McControl | None = None, threads=None) -> MomentReport:
    """Sample mean and covariance of ``Y_k = f_k(X_k)``.

    ``tau`` uses divisor ``N - 1``. The error estimate of ``tau_ij`` is the
    plug-in standard error ``sqrt((m22 - tau^2) / N)`` with ``m22`` the mean
    of ``(Y_i - m_i)^2 (Y_j - m_j)^2``; that of ``nu_i`` is ``sqrt(tau_ii / N)``.

    Blocks are reduced in index order with exact summation, so the report is
    bitwise identical for every thread count.
    """
    mc = mc or McControl()
    funcs = list(funcs)
    if len(funcs) != spec.dim:
        raise InputError(f"need {spec.dim} functions, got {len(funcs)}")
    n = int(mc.samples)
    dim = spec.dim
    sizes = [min(mc.block, n - s) for s in range(0, n, mc.block)]
    iu = np.triu_indices(dim)

    def first(b):
        y = _block_values(spec, funcs, mc, b, sizes[b])
        return np.sum(y, axis=0)

    with ThreadPoolExecutor(max_workers=_threads(threads)) as pool:
        sums = list(pool.map(first, range(len(sizes))))
        mean = np.array([math.fsum(s[k] for s in sums) for k in range(dim)]) / n

        def second(b):
            c = _block_values(spec, funcs, mc, b, sizes[b]) - mean
            prod = c[:, iu[0]] * c[:, iu[1]]
            return np.sum(prod, axis=0), np.sum(prod * prod, axis=0)

        parts = list(pool.map(second, range(len(sizes))))

    n_pairs = len(iu[0])
    s2 = np.array([math.fsum(p[0][m] for p in parts) for m in range(n_pairs)])
    s4 = np.array([math.fsum(p[1][m] for p in parts) for m in range(n_pairs)])
    tau_u = s2 / (n - 1)
    se_u = np.sqrt(np.maximum(s4 / n - (s2 / n) ** 2, 0.0) / n)
    tau = np.empty((dim, dim))
    se = np.empty((dim, dim))
    tau[iu] = tau_u
    tau.T[iu] = tau_u
    se[iu] = se_u
    se.T[iu] = se_u
    return MomentReport(
        nu=mean,
        tau=tau,
        nu_method=["monte_carlo"] * dim,
        tau_method=[["monte_carlo"] * dim for _ in range(dim)],
        nu_error=np.sqrt(np.maximum(np.diag(tau), 0.0) / n),
        tau_error=se,
        provenance={
            "rng": "numpy Philox4x64-10",
            "seed": int(mc.seed),
            "samples": n,
            "block": int(mc.block),
            "antithetic": bool(mc.antithetic),
        },
    )
