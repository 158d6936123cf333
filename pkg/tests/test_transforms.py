import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import finite_difference, indicator_cov

from nonparanormal import SeriesControl, tau_quadrature
from nonparanormal.catalog import catalog_tau, catalog_transform
from nonparanormal.core import Catalog
from nonparanormal.errors import ConvergenceDomainViolation, DomainError, ImaginaryResidue, InputError
from nonparanormal.oracle import nu_quadrature
from nonparanormal.transforms import (
    FkStarFunction,
    kruskal_correlation,
    nu_fourier_coefficients,
    nu_fourier_transform,
    nu_laplace,
    tau_fourier_coefficients,
    tau_fourier_integral,
    tau_fourier_series_expansion,
    tau_laplace,
    tau_normal_to_uniform,
)

SINC = catalog_transform(Catalog(12))
GAUSS = catalog_transform(Catalog(11, a=1.0))
SIN_SUM = {1: 1 / 2j, -1: -1 / 2j, 2: 1 / 2j, -2: -1 / 2j}
COS = {1: 0.5, -1: 0.5}


def sin_sum(x):
    return np.sin(x) + np.sin(2 * x)


def unit_box(t):
    return np.ones_like(np.asarray(t, dtype=float))


def laplace_box(x):
    # f(x) = int_0^1 exp(-x t) dt
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, -np.expm1(-safe) / safe)


class TestFkStar:
    def test_gaussian_zeroth(self):
        # (1/2pi) int exp(-y^2/2 - y^2 x) dy
        x = 0.5
        assert FkStarFunction(GAUSS.g)(0, x).real == pytest.approx(1 / math.sqrt(2 * math.pi * 2), rel=1e-13)

    def test_odd_k_vanishes_for_even_g(self):
        assert abs(FkStarFunction(GAUSS.g)(3, 0.5)) < 1e-15

    def test_bound(self):
        fk = FkStarFunction(SINC.g)
        for k in range(1, 6):
            assert abs(fk(k, 0.5)) <= fk.bound(k, 0.5, 2.0)


class TestFourierIntegral:
    def test_gaussian_example(self):
        tau, err = tau_fourier_integral(GAUSS.g, GAUSS.g, 1, 1, 0.25)
        closed = ((4 - 1 / 16) ** -0.5 - 0.5) / (2 * math.pi)
        assert tau == pytest.approx(closed, abs=1e-13)
        assert round(tau, 4) == 0.0006

    def test_indicator(self):
        assert tau_fourier_integral(SINC.g, SINC.g, 1, 1, 0.25)[0] == pytest.approx(indicator_cov(0.25), abs=1e-12)

    def test_zero(self):
        assert tau_fourier_integral(SINC.g, SINC.g, 1, 1, 0.0) == (0.0, 0.0)

    @pytest.mark.parametrize("s", [-0.9, -0.5, -0.25, 0.25, 0.5, 0.9])
    def test_series_equals_integral(self, s):
        a, ea = tau_fourier_integral(SINC.g, SINC.g, 1, 1, s)
        # the tail bound decays like |rho|^k, so |rho| = 0.9 needs ~260 terms
        ctl = SeriesControl(max_terms=400)
        b, eb = tau_fourier_series_expansion(SINC.g, SINC.g, 2.0, 2.0, 1, 1, s, ctl)
        assert abs(a - b) <= ea + eb + 1e-12

    def test_series_first_terms(self):
        # (1/(pi e)) (s^2 + s^4/3 + ...) dominates at small s
        s = 0.05
        b = tau_fourier_series_expansion(SINC.g, SINC.g, 2.0, 2.0, 1, 1, s)[0]
        assert b == pytest.approx((s * s + s**4 / 3) / (math.pi * math.e), rel=1e-5)

    def test_series_domain(self):
        with pytest.raises(ConvergenceDomainViolation):
            tau_fourier_series_expansion(SINC.g, SINC.g, 2.0, 2.0, 1, 1, 1.0)

    def test_means(self):
        assert nu_fourier_transform(SINC.g, 1.0)[0] == pytest.approx(math.erf(1 / math.sqrt(2)), abs=1e-12)
        assert nu_fourier_transform(GAUSS.g, 2.0)[0] == pytest.approx(1 / math.sqrt(2 * math.pi * 3), rel=1e-12)

    @pytest.mark.parametrize("s", [-0.5, 0.3])
    def test_gaussian_unequal_variances(self, s):
        f = catalog_transform(Catalog(11, a=1.0)).func
        ref = tau_quadrature(f, f, 1.5, 0.7, s)[0]
        assert tau_fourier_integral(GAUSS.g, GAUSS.g, 1.5, 0.7, s)[0] == pytest.approx(ref, abs=1e-12)


class TestFourierCoefficients:
    def test_sin_sum_closed_form(self):
        closed = math.sinh(1) * math.exp(-4) + 2 * math.sinh(0.5) * math.exp(-2.5) + math.sinh(0.25) * math.exp(-1)
        assert tau_fourier_coefficients(SIN_SUM, SIN_SUM, 1, 1, 0.25) == pytest.approx(closed, rel=1e-14)

    @pytest.mark.parametrize("sig", [(1, 1, 0.25), (2, 0.5, 0.3), (0.7, 1.8, -0.6)])
    def test_sin_sum_against_quadrature(self, sig):
        tau = tau_fourier_coefficients(SIN_SUM, SIN_SUM, *sig)
        ref = tau_quadrature(sin_sum, sin_sum, *sig)[0]
        assert abs(tau - ref) <= 1e-8

    def test_printed_exponent_mismatches(self):
        sig = (2, 0.5, 0.3)
        printed = tau_fourier_coefficients(SIN_SUM, SIN_SUM, *sig, exponent="printed")
        ref = tau_quadrature(sin_sum, sin_sum, *sig)[0]
        assert abs(printed - ref) > 1e-2

    def test_cos(self):
        assert round(tau_fourier_coefficients(COS, COS, 1, 1, 0.25), 4) == 0.0116

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(-0.99, 0.99))
    def test_cos_matches_catalog(self, a, b, r):
        s = r * math.sqrt(a * b)
        assert tau_fourier_coefficients(COS, COS, a, b, s) == pytest.approx(
            catalog_tau(Catalog(2), a, b, s)[0], rel=1e-12, abs=1e-15
        )

    def test_constant(self):
        assert tau_fourier_coefficients({0: 3.0}, {0: 3.0}, 1, 1, 0.4) == 0.0

    def test_mean(self):
        assert nu_fourier_coefficients(COS, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-15)

    def test_imaginary_residue(self):
        with pytest.raises(ImaginaryResidue):
            tau_fourier_coefficients({1: 1.0}, {1: 1j}, 1, 1, 0.25)

    def test_bad_exponent(self):
        with pytest.raises(InputError):
            tau_fourier_coefficients(COS, COS, 1, 1, 0.25, exponent="squared")


class TestLaplace:
    @pytest.mark.parametrize("sig", [(1, 1, 0.25), (2, 0.5, 0.3), (0.5, 1.5, -0.4)])
    def test_mgf_against_quadrature(self, sig):
        tau = tau_laplace(unit_box, unit_box, 1.0, 1.0, *sig)[0]
        ref = tau_quadrature(laplace_box, laplace_box, *sig)[0]
        assert abs(tau - ref) <= 1e-8

    def test_printed_mismatches(self):
        printed = tau_laplace(unit_box, unit_box, 1.0, 1.0, 1, 1, 0.25, formula="printed")[0]
        ref = tau_quadrature(laplace_box, laplace_box, 1, 1, 0.25)[0]
        assert abs(printed - ref) > 0.1

    def test_zero(self):
        assert tau_laplace(unit_box, unit_box, 1.0, 1.0, 1, 1, 0.0)[0] == 0.0

    def test_mean(self):
        assert nu_laplace(unit_box, 1.0, 1.0)[0] == pytest.approx(nu_quadrature(laplace_box, 1.0)[0], abs=1e-12)

    @pytest.mark.parametrize("width", [1e-2, 1e-3])
    def test_narrow_bump_approaches_exponential(self, width):
        a = 0.7

        def bump(t):
            return np.where(np.abs(np.asarray(t) - a) <= width, 1 / (2 * width), 0.0)

        box = (a - width, a + width)
        tau = tau_laplace(bump, bump, box, box, 1, 1, 0.25)[0]
        exact = math.exp(a * a) * math.expm1(a * a * 0.25)
        # the bump's second moment shifts the value by O(width^2)
        assert abs(tau - exact) <= 2 * width * width

    def test_bad_support(self):
        with pytest.raises(InputError):
            tau_laplace(unit_box, unit_box, (-1.0, 1.0), 1.0, 1, 1, 0.2)


class TestNormalCdf:
    def test_values(self):
        assert round(tau_normal_to_uniform(0.25), 4) == 0.0199
        assert tau_normal_to_uniform(1.0) == pytest.approx(1 / 12, rel=1e-15)
        assert tau_normal_to_uniform(0.0) == 0.0

    @pytest.mark.parametrize("s", [0.0, 0.5, -0.5, 1.5, -1.5])
    def test_derivative(self, s):
        d = finite_difference(tau_normal_to_uniform, s)
        assert d == pytest.approx(1 / (2 * math.pi * math.sqrt(4 - s * s)), abs=1e-8)

    def test_domain(self):
        with pytest.raises(DomainError):
            tau_normal_to_uniform(2.0)
        with pytest.raises(DomainError):
            kruskal_correlation(1.5)

    @pytest.mark.parametrize("rho", [0.1, 0.5, 0.9])
    def test_kruskal(self, rho):
        # U = 2 Phi(X) - 1 scales the covariance by 4; var U = 1/3
        tau_ij = 4 * tau_normal_to_uniform(rho)
        ratio = tau_ij / math.sqrt((1 / 3) * (1 / 3))
        assert ratio == pytest.approx(kruskal_correlation(rho), rel=4e-16)
