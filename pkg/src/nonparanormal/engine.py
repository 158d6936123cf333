"""Run configuration, method dispatch and full-matrix assembly."""

from __future__ import annotations

import csv
import io
import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catalog as cat
from .core import (
    METHODS,
    Catalog,
    FourierSeries,
    FourierTransform,
    GaussianSpec,
    Laplace,
    MomentReport,
    SeriesControl,
    Taylor,
    pointwise,
    validate_gaussian,
)
from .errors import (
    ConfigError,
    IncompatibleMethod,
    InputError,
    NonparanormalError,
    UnsupportedRepresentation,
)
from .oracle import THREADS_ENV, McControl, nu_quadrature, sample_transformed, tau_diag_quadrature, tau_quadrature
from .quadrature import QuadConfig
from .series import nu_series, tau_diag_series, tau_series
from .transforms import (
    nu_fourier_coefficients,
    nu_fourier_transform,
    nu_laplace,
    tau_fourier_coefficients,
    tau_fourier_integral,
    tau_laplace,
)

__all__ = [
    "RunConfig",
    "parse_function",
    "load_config",
    "compute_moments",
    "moments",
    "write_csv",
    "read_csv",
    "format_table",
]

CSV_HEADER = ("i", "j", "value", "kind", "method", "error_estimate")
FORMATS = ("csv", "table")
_AUTO_ORDER = ("catalog", "series", "fourier_series", "fourier_integral", "laplace", "quadrature")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    gaussian: GaussianSpec
    functions: list
    method: str = "auto"
    series: SeriesControl = field(default_factory=SeriesControl)
    mc: McControl = field(default_factory=McControl)
    output_path: str | None = None
    output_format: str = "csv"
    quad: QuadConfig = field(default_factory=QuadConfig)

    def __post_init__(self):
        if self.method != "auto" and self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"output format must be one of {FORMATS}")
        n = len(self.functions)
        if n == 1:
            self.functions = list(self.functions) * self.gaussian.dim
        elif n != self.gaussian.dim:
            raise ConfigError(f"need 1 or {self.gaussian.dim} functions, got {n}")


def _expr_callable(text, var):
    """Vectorised callable from an expression string in one variable."""
    import sympy

    sym = sympy.Symbol(var, real=True)
    try:
        expr = sympy.sympify(text, locals={var: sym})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc}") from None
    extra = expr.free_symbols - {sym}
    if extra:
        raise ConfigError(f"expression {text!r} has unknown symbols {sorted(map(str, extra))}")
    fn = sympy.lambdify(sym, expr, modules=["numpy", "scipy"])

    def call(v):
        v = np.asarray(v, dtype=float)
        return np.broadcast_to(fn(v), v.shape).astype(complex if expr.has(sympy.I) else float)

    return call, expr, sym


def _taylor_from_expr(text, C, K, degree=None):
    import sympy

    func, expr, sym = _expr_callable(text, "x")
    derivs = {0: expr}
    lock = threading.Lock()

    def coeff(a):
        with lock:
            last = max(k for k in derivs if k <= a)
            d = derivs[last]
            for k in range(last + 1, a + 1):
                d = sympy.diff(d, sym)
                derivs[k] = d
            return float(d.subs(sym, 0))

    return Taylor(coeff, C, K, degree=degree, func=func, name=text)


def _complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex values are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    return complex(v)


def parse_function(desc):
    """Build a representation from a JSON descriptor.

    Recognised forms::

        {"catalog": "sin_a", "a": 2}
        {"taylor": "identity"}
        {"taylor": "polynomial", "coefficients": [c0, c1, ...]}
        {"taylor": "sin(x)", "C": 1, "K": 1}
        {"fourier_series": {"1": [0, -0.5], "-1": [0, 0.5]}}
        {"fourier_transform": "2*sin(y)/y", "bound": 2, "f": "..."}
        {"laplace": "1", "support": [0, 1], "f": "..."}
        {"callable": "x**2"}

    ``"f"`` is an optional pointwise expression in ``x``; ``"breakpoints"``
    lists kinks of ``g``.
    """
    if isinstance(desc, str):
        desc = {"catalog": desc}
    if not isinstance(desc, dict) or not desc:
        raise ConfigError(f"bad function descriptor {desc!r}")
    try:
        if "catalog" in desc:
            n = desc.get("n")
            return cat.make_entry(desc["catalog"], a=desc.get("a"), b=desc.get("b"), n=None if n is None else int(n))
        if "taylor" in desc:
            kind = desc["taylor"]
            if kind == "identity":
                return Taylor.polynomial([0.0, 1.0], name="identity")
            if kind == "polynomial":
                return Taylor.polynomial(desc["coefficients"])
            if "C" not in desc or "K" not in desc:
                raise ConfigError("a Taylor expression needs growth constants C and K")
            return _taylor_from_expr(kind, desc["C"], desc["K"], desc.get("degree"))
        if "fourier_series" in desc:
            coefs = {int(k): _complex(v) for k, v in desc["fourier_series"].items()}
            return FourierSeries(coefs)
        func = None
        if "f" in desc:
            func = _expr_callable(desc["f"], "x")[0]
        if "fourier_transform" in desc:
            g = _expr_callable(desc["fourier_transform"], "y")[0]
            if "bound" not in desc:
                raise ConfigError("a Fourier transform needs a bound on |g|")
            return FourierTransform(
                _nan_safe(g), float(desc["bound"]), tuple(desc.get("breakpoints", ())), func, desc["fourier_transform"]
            )
        if "laplace" in desc:
            g = _expr_callable(desc["laplace"], "t")[0]
            return Laplace(g, desc.get("support", 1.0), func, desc["laplace"])
        if "callable" in desc:
            fn = _expr_callable(desc["callable"], "x")[0]
            fn.__name__ = str(desc["callable"])
            return fn
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad function descriptor {desc!r}: {exc}") from None
    raise ConfigError(f"unrecognised function descriptor {desc!r}")


def _nan_safe(g):
    """Evaluate removable singularities (``sin(y)/y`` at 0) by a tiny offset."""

    def call(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = g(y)
        bad = ~np.isfinite(v)
        if np.any(bad):
            v = np.array(v, copy=True)
            v[bad] = g(np.where(y[bad] == 0, 1e-8, y[bad] * (1 + 1e-12)))
        return v

    return call


def _load_matrix(src, base):
    if isinstance(src, dict) and "path" in src:
        src = src["path"]
    if isinstance(src, str):
        path = Path(src)
        if not path.is_absolute():
            path = base / path
        try:
            src = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read covariance from {path}: {exc}") from None
        if isinstance(src, dict):
            src = src.get("gaussian", src.get("sigma"))
    try:
        arr = np.asarray(src, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("gaussian must be a square numeric matrix") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ConfigError("gaussian must be a square matrix")
    return arr


def load_config(source) -> RunConfig:
    """RunConfig from a JSON file path or an already parsed mapping."""
    base = Path.cwd()
    if not isinstance(source, dict):
        path = Path(source)
        base = path.parent
        try:
            source = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    allowed = {"gaussian", "functions", "method", "series", "mc", "output"}
    unknown = set(source) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if "gaussian" not in source or "functions" not in source:
        raise ConfigError("config needs 'gaussian' and 'functions'")
    try:
        spec = validate_gaussian(_load_matrix(source["gaussian"], base))
        funcs = [parse_function(d) for d in source["functions"]]
        series = SeriesControl(**source.get("series", {}))
        mc = McControl(**source.get("mc", {}))
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    out = source.get("output", {})
    if isinstance(out, str):
        out = {"path": out}
    return RunConfig(
        spec,
        funcs,
        source.get("method", "auto"),
        series,
        mc,
        out.get("path"),
        out.get("format", "csv"),
    )


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def _as_taylor(f):
    if isinstance(f, Taylor):
        return f
    if isinstance(f, Catalog):
        try:
            return cat.catalog_taylor(f)
        except UnsupportedRepresentation:
            return None
    return None


def _as_transform(f):
    if isinstance(f, FourierTransform):
        return f
    if isinstance(f, Catalog):
        try:
            return cat.catalog_transform(f)
        except UnsupportedRepresentation:
            return None
    return None


def _breakpoints(f):
    return cat.catalog_breakpoints(f) if isinstance(f, Catalog) else ()


def _callable(f):
    try:
        return pointwise(f)
    except UnsupportedRepresentation:
        return None


def _catalog_ok(fi, fj, s_ii, s_jj):
    if not (isinstance(fi, Catalog) and isinstance(fj, Catalog) and cat.compatible(fi, fj)):
        return False
    if fi.entry in (12, 13, 14) and (s_ii != 1.0 or s_jj != 1.0):
        return False
    return True


def _supports(method, fi, fj, s_ii, s_jj, diag):
    if method == "catalog":
        return _catalog_ok(fi, fj, s_ii, s_jj)
    if method == "series":
        return _as_taylor(fi) is not None and _as_taylor(fj) is not None
    if method == "fourier_series":
        return isinstance(fi, FourierSeries) and isinstance(fj, FourierSeries)
    if method == "fourier_integral":
        ok = _as_transform(fi) is not None and _as_transform(fj) is not None
        # the double integral is singular at full correlation; variances use quadrature
        return ok and (not diag or _callable(fi) is not None)
    if method == "laplace":
        return isinstance(fi, Laplace) and isinstance(fj, Laplace)
    if method == "quadrature":
        return _callable(fi) is not None and _callable(fj) is not None
    return False


def _pick(method, fi, fj, s_ii, s_jj, diag, where):
    if method == "auto":
        for m in _AUTO_ORDER:
            if _supports(m, fi, fj, s_ii, s_jj, diag):
                return m
        raise IncompatibleMethod(f"{where}: no method handles {fi!r} with {fj!r}")
    if not _supports(method, fi, fj, s_ii, s_jj, diag):
        raise IncompatibleMethod(f"{where}: method {method!r} cannot handle {fi!r} with {fj!r}")
    return method


def _nu_entry(method, f, s_ii, cfg):
    if method == "catalog":
        return cat.catalog_nu(f, s_ii), 0.0
    if method == "series":
        return nu_series(_as_taylor(f), s_ii, cfg.series)
    if method == "fourier_series":
        return nu_fourier_coefficients(f.coefficients, s_ii), 0.0
    if method == "fourier_integral":
        t = _as_transform(f)
        return nu_fourier_transform(t.g, s_ii, cfg.quad, t.breakpoints)
    if method == "laplace":
        return nu_laplace(f.g, f.support, s_ii, cfg.quad)
    return nu_quadrature(pointwise(f), s_ii, cfg.quad, _breakpoints(f))


def _tau_entry(method, fi, fj, s_ii, s_jj, s_ij, cfg, diag):
    if method == "catalog":
        if diag:
            return cat.catalog_tau_diag(fi, s_ii, cfg.series)
        return cat.catalog_tau(fi, s_ii, s_jj, s_ij, cfg.series, partner=fj)
    if method == "series":
        ti, tj = _as_taylor(fi), _as_taylor(fj)
        if diag:
            return tau_diag_series(ti, s_ii, cfg.series)
        return tau_series(ti, tj, s_ii, s_jj, s_ij, cfg.series)
    if method == "fourier_series":
        return tau_fourier_coefficients(fi.coefficients, fj.coefficients, s_ii, s_jj, s_ij), 0.0
    if method == "fourier_integral":
        if diag:
            return tau_diag_quadrature(pointwise(fi), s_ii, cfg.quad, _breakpoints(fi))
        ti, tj = _as_transform(fi), _as_transform(fj)
        return tau_fourier_integral(ti.g, tj.g, s_ii, s_jj, s_ij, cfg.quad)
    if method == "laplace":
        return tau_laplace(fi.g, fj.g, fi.support, fj.support, s_ii, s_jj, s_ij, cfg.quad)
    if diag:
        return tau_diag_quadrature(pointwise(fi), s_ii, cfg.quad, _breakpoints(fi))
    return tau_quadrature(
        pointwise(fi), pointwise(fj), s_ii, s_jj, s_ij, cfg.quad, _breakpoints(fi), _breakpoints(fj)
    )


def _with_context(where, fn, *args):
    try:
        return fn(*args)
    except NonparanormalError as exc:
        exc.args = (f"{where}: {exc.args[0] if exc.args else exc}",) + tuple(exc.args[1:])
        raise


def _thread_count():
    env = os.environ.get(THREADS_ENV)
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None


def compute_moments(cfg: RunConfig, threads: int | None = None) -> MomentReport:
    """Mean vector and covariance matrix for every coordinate pair.

    ``method="auto"`` takes the catalog for compatible catalog pairs, the
    series for Taylor pairs, the matching transform route when both share one,
    and quadrature otherwise. Variances use the diagonal forms.
    """
    spec, funcs = cfg.gaussian, cfg.functions
    dim = spec.dim
    if cfg.method == "monte_carlo":
        calls = [pointwise(f) for f in funcs]
        report = sample_transformed(spec, calls, cfg.mc, threads)
        report.check()
        return report
    sig = spec.sigma
    jobs = []
    for i in range(dim):
        for j in range(i, dim):
            diag = i == j
            where = f"entry ({i},{j})"
            m = _pick(cfg.method, funcs[i], funcs[j], sig[i, i], sig[j, j], diag, where)
            jobs.append((i, j, m, where))
    nu_methods = []
    for i in range(dim):
        nu_methods.append(_pick(cfg.method, funcs[i], funcs[i], sig[i, i], sig[i, i], False, f"mean {i}"))

    def run_tau(job):
        i, j, m, where = job
        return _with_context(
            where, _tau_entry, m, funcs[i], funcs[j], sig[i, i], sig[j, j], sig[i, j], cfg, i == j
        )

    def run_nu(i):
        return _with_context(f"mean {i}", _nu_entry, nu_methods[i], funcs[i], sig[i, i], cfg)

    workers = threads if threads is not None else _thread_count()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        tau_vals = list(pool.map(run_tau, jobs))
        nu_vals = list(pool.map(run_nu, range(dim)))

    tau = np.zeros((dim, dim))
    err = np.zeros((dim, dim))
    methods = [[None] * dim for _ in range(dim)]
    for (i, j, m, _), (v, e) in zip(jobs, tau_vals):
        if i == j and m == "fourier_integral":
            m = "quadrature"
        tau[i, j] = tau[j, i] = v
        err[i, j] = err[j, i] = e
        methods[i][j] = methods[j][i] = m
    report = MomentReport(
        nu=np.array([v for v, _ in nu_vals]),
        tau=tau,
        nu_method=nu_methods,
        tau_method=methods,
        nu_error=np.array([e for _, e in nu_vals]),
        tau_error=err,
        provenance={"method": cfg.method},
    )
    report.check()
    return report


def moments(sigma, functions, method="auto", **kwargs) -> MomentReport:
    """Convenience wrapper: ``moments([[1, .25], [.25, 1]], [Catalog(1)])``."""
    cfg = RunConfig(validate_gaussian(sigma), list(functions), method, **kwargs)
    return compute_moments(cfg)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v):
    return format(float(v), ".17g")


def write_csv(report: MomentReport, out=None) -> str:
    """Serialise a report; one row per mean and per upper-triangle covariance."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for i in range(report.dim):
        w.writerow([i, "", _fmt(report.nu[i]), "nu", report.nu_method[i], _fmt(report.nu_error[i])])
    for i in range(report.dim):
        for j in range(i, report.dim):
            w.writerow(
                [i, j, _fmt(report.tau[i, j]), "tau", report.tau_method[i][j], _fmt(report.tau_error[i, j])]
            )
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text


def read_csv(source) -> MomentReport:
    """Inverse of :func:`write_csv`; accepts CSV text or a path."""
    text = source if isinstance(source, str) and "\n" in source else Path(source).read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or tuple(rows[0].keys()) != CSV_HEADER:
        raise InputError("not a moment report CSV")
    dim = sum(1 for r in rows if r["kind"] == "nu")
    nu, nu_err = np.zeros(dim), np.zeros(dim)
    tau, tau_err = np.zeros((dim, dim)), np.zeros((dim, dim))
    nu_m = [None] * dim
    tau_m = [[None] * dim for _ in range(dim)]
    for r in rows:
        i = int(r["i"])
        if r["kind"] == "nu":
            nu[i], nu_err[i], nu_m[i] = float(r["value"]), float(r["error_estimate"]), r["method"]
        else:
            j = int(r["j"])
            tau[i, j] = tau[j, i] = float(r["value"])
            tau_err[i, j] = tau_err[j, i] = float(r["error_estimate"])
            tau_m[i][j] = tau_m[j][i] = r["method"]
    return MomentReport(nu, tau, nu_m, tau_m, nu_err, tau_err)


def format_table(report: MomentReport) -> str:
    """Human-readable rendering of a report."""
    dim = report.dim
    lines = ["nu:"]
    for i in range(dim):
        lines.append(f"  [{i}] {report.nu[i]: .10g}  (+- {report.nu_error[i]:.2g}, {report.nu_method[i]})")
    lines.append("tau:")
    width = 16
    lines.append("      " + "".join(f"{j:>{width}d}" for j in range(dim)))
    for i in range(dim):
        lines.append(f"  [{i}] " + "".join(f"{report.tau[i, j]:>{width}.10g}" for j in range(dim)))
    lines.append("methods / error estimates:")
    for i in range(dim):
        for j in range(i, dim):
            lines.append(f"  ({i},{j}) {report.tau_method[i][j]:<16} {report.tau_error[i, j]:.3g}")
    return "\n".join(lines)

