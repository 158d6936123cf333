"""Quadrature rules shared by the transform methods and the oracles.

Gauss-Hermite weights are returned as logarithms: for a few hundred nodes
the outer weights underflow, while the integrands they multiply can be
large (``exp(-2 rho t s)`` couplings, ``t**k`` moments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import InputError

__all__ = [
    "ROUNDING",
    "QuadConfig",
    "gauss_hermite",
    "gauss_legendre",
    "legendre_panels",
    "row_panels",
]

# relative rounding allowance on a sum, scaled by the sum of absolute terms
ROUNDING = 16 * np.finfo(float).eps


@dataclass(frozen=True)
class QuadConfig:
    """Refinement schedule for the tensor quadratures.

    ``nodes`` is the starting Gauss-Hermite count, doubled until two
    successive results agree within ``rel_tol`` (plus ``abs_tol`` times the
    integrand's absolute mass) or ``max_nodes`` is passed.

    The Legendre-panel oracle reads ``half_width`` (window in standard
    deviations), ``panel_width`` (panel size in standard deviations) and
    ``orders`` (per-panel node counts tried in turn).
    """

    nodes: int = 120
    max_nodes: int = 960
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    half_width: float = 14.0
    panel_width: float = 1.0
    orders: tuple = (10, 20, 40, 80)
    oracle_rel_tol: float = 1e-12

    def __post_init__(self):
        if self.nodes < 2 or self.max_nodes < self.nodes:
            raise InputError("need 2 <= nodes <= max_nodes")
        if not (self.rel_tol > 0 and self.abs_tol >= 0):
            raise InputError("quadrature tolerances must be positive")
        if self.half_width <= 0 or self.panel_width <= 0 or not self.orders:
            raise InputError("invalid oracle panel configuration")

    def schedule(self):
        n = self.nodes
        while n <= self.max_nodes:
            yield n
            n *= 2


def _orthonormal_hermite_tail(t, n):
    """``log|p_{n-1}(t)|`` and the ratio ``p_n(t) / p_{n-1}(t)`` (rescaled recurrence)."""
    p_prev = np.zeros_like(t)
    p = np.full_like(t, math.pi**-0.25)
    log_scale = np.zeros_like(t)
    for k in range(n):
        if k == n - 1:
            p_last, scale_last = p, log_scale.copy()
        p_next = t * math.sqrt(2.0 / (k + 1)) * p - math.sqrt(k / (k + 1)) * p_prev
        p_prev, p = p, p_next
        big = np.abs(p) > 1e150
        if big.any():
            p = np.where(big, p * 1e-150, p)
            p_prev = np.where(big, p_prev * 1e-150, p_prev)
            log_scale = log_scale + np.where(big, 150 * math.log(10.0), 0.0)
    # p is p_n, p_prev is p_{n-1}, both carrying the same final scale
    return np.log(np.abs(p_last)) + scale_last, p / p_prev


@lru_cache(maxsize=32)
def gauss_hermite(n: int):
    """Nodes and log-weights of the ``n``-point rule for weight ``exp(-t^2)``.

    Nodes come from the symmetric Jacobi matrix, polished by Newton steps,
    and are made exactly symmetric: ``t[k] == -t[n-1-k]``.

    Returns
    -------
    t : ndarray, shape (n,)
    log_w : ndarray, shape (n,)
    """
    off = np.sqrt(np.arange(1, n) / 2.0)
    t = eigvalsh_tridiagonal(np.zeros(n), off)
    for _ in range(2):
        _, ratio = _orthonormal_hermite_tail(t, n)
        t = t - ratio / math.sqrt(2.0 * n)
    t = np.sort(0.5 * (t - t[::-1]))
    if n % 2:
        t[n // 2] = 0.0
    log_p, _ = _orthonormal_hermite_tail(t, n)
    # w_k = 1 / (n p_{n-1}(t_k)^2)
    log_w = -math.log(n) - 2.0 * log_p
    log_w = 0.5 * (log_w + log_w[::-1])
    t.setflags(write=False)
    log_w.setflags(write=False)
    return t, log_w


@lru_cache(maxsize=32)
def gauss_legendre(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def legendre_panels(edges, m: int):
    """Composite Gauss-Legendre rule on consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(m)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def row_panels(base_edges, extra, m: int):
    """Composite rules for many windows at once.

    ``base_edges`` has shape ``(rows, P+1)``; ``extra`` has shape
    ``(rows, B)`` and holds additional split points (clamped into each row's
    window so the panel count is the same for every row). Returns node and
    weight arrays of shape ``(rows, (P+B) * m)``.
    """
    lo = base_edges[:, :1]
    hi = base_edges[:, -1:]
    if extra is not None and extra.shape[1]:
        extra = np.clip(extra, lo, hi)
        edges = np.sort(np.concatenate([base_edges, extra], axis=1), axis=1)
    else:
        edges = base_edges
    x, w = gauss_legendre(m)
    a, b = edges[:, :-1, None], edges[:, 1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).reshape(edges.shape[0], -1)
    weights = (half * w).reshape(edges.shape[0], -1)
    return nodes, weights
