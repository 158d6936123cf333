"""Exact mean and covariance of ``Y = (f_1(X_1), ..., f_d(X_d))`` for Gaussian ``X``.

Typical use::

    from nonparanormal import Catalog, moments
    report = moments([[1, 0.25], [0.25, 1]], [Catalog(1)])
    report.tau
"""

from .core import (
    Catalog,
    FourierSeries,
    FourierTransform,
    GaussianSpec,
    Laplace,
    MomentReport,
    SeriesControl,
    Taylor,
    odd_even_split,
    tau_bilinear_combine,
    validate_gaussian,
)
from .engine import RunConfig, compute_moments, load_config, moments, parse_function, read_csv, write_csv
from .oracle import McControl, nu_quadrature, sample_transformed, tau_diag_quadrature, tau_quadrature
from .quadrature import QuadConfig

__all__ = [
    "Catalog",
    "FourierSeries",
    "FourierTransform",
    "GaussianSpec",
    "Laplace",
    "McControl",
    "MomentReport",
    "QuadConfig",
    "RunConfig",
    "SeriesControl",
    "Taylor",
    "compute_moments",
    "load_config",
    "moments",
    "nu_quadrature",
    "odd_even_split",
    "parse_function",
    "read_csv",
    "sample_transformed",
    "tau_bilinear_combine",
    "tau_diag_quadrature",
    "tau_quadrature",
    "validate_gaussian",
    "write_csv",
]
