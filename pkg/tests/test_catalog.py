import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import indicator_cov, polynomial_tau, x_indicator_cov

from nonparanormal import tau_diag_quadrature, tau_quadrature
from nonparanormal.catalog import (
    NAMES,
    catalog_breakpoints,
    catalog_function,
    catalog_nu,
    catalog_parity,
    catalog_taylor,
    catalog_tau,
    catalog_tau_diag,
    catalog_transform,
    check_entry,
    compatible,
    entry_id,
    make_entry,
    x_indicator_printed_series,
)
from nonparanormal.core import Catalog, Taylor
from nonparanormal.errors import ConstraintViolation, InputError, UnsupportedRepresentation
from nonparanormal.oracle import nu_quadrature
from nonparanormal.series import tau_series
from nonparanormal.transforms import tau_fourier_integral

TAYLOR_ROWS = [
    Catalog(1),
    Catalog(2),
    Catalog(3, a=-1.3),
    Catalog(4, a=0.8),
    Catalog(5, a=0.6),
    Catalog(6, a=1.1),
    Catalog(7),
    Catalog(8, a=-0.4),
    Catalog(9, n=2),
    Catalog(10, n=1),
]


def pd_triple(a, b, r):
    return a, b, r * math.sqrt(a * b)


class TestEntries:
    def test_names_round_trip(self):
        for k, name in NAMES.items():
            assert entry_id(name) == k
            assert entry_id(str(k)) == k

    @pytest.mark.parametrize("key", ["tan", 0, 15, True, 2.0])
    def test_unknown(self, key):
        with pytest.raises(InputError):
            entry_id(key)

    @pytest.mark.parametrize(
        "kw",
        [
            {"key": 3},
            {"key": 3, "a": 0.0},
            {"key": 9, "n": -1},
            {"key": 9, "n": 1.5},
            {"key": 11, "a": -1.0},
            {"key": 1, "a": 2.0},
            {"key": 2, "n": 1},
        ],
    )
    def test_bad_parameters(self, kw):
        with pytest.raises(InputError):
            make_entry(kw.pop("key"), **kw)

    def test_check_entry_accepts(self):
        check_entry(Catalog(11, a=1.0, b=2.0))

    def test_compatible(self):
        assert compatible(Catalog(11, a=1.0), Catalog(11, a=3.0))
        assert not compatible(Catalog(3, a=1.0), Catalog(3, a=2.0))
        assert not compatible(Catalog(1), Catalog(2))

    def test_incompatible_partner(self):
        with pytest.raises(ConstraintViolation):
            catalog_tau(Catalog(1), 1, 1, 0.2, partner=Catalog(2))

    @pytest.mark.parametrize("row", [12, 13, 14])
    def test_unit_variance_rows(self, row):
        with pytest.raises(ConstraintViolation):
            catalog_tau(Catalog(row), 1.0, 2.0, 0.2)
        with pytest.raises(ConstraintViolation):
            catalog_nu(Catalog(row), 0.5)


class TestReductions:
    def test_scaled_rows_at_unit_a(self):
        for plain, scaled in ((1, 3), (2, 4), (7, 8)):
            for s in (-0.3, 0.25):
                assert catalog_tau(Catalog(plain), 1.2, 0.8, s)[0] == pytest.approx(
                    catalog_tau(Catalog(scaled, a=1.0), 1.2, 0.8, s)[0], rel=1e-15
                )

    def test_exp_is_sinh_plus_cosh(self):
        s = (1.0, 1.0, 0.25)
        total = catalog_tau(Catalog(7), *s)[0]
        parts = catalog_tau(Catalog(5, a=1.0), *s)[0] + catalog_tau(Catalog(6, a=1.0), *s)[0]
        assert total == pytest.approx(parts, rel=1e-14)

    @pytest.mark.parametrize("n", range(5))
    def test_powers_against_wick(self, n):
        for row, p in ((9, 2 * n), (10, 2 * n + 1)):
            c = [0.0] * p + [1 / math.factorial(p)]
            expected = polynomial_tau(c, c, 1.3, 0.7, 0.4)
            assert catalog_tau(Catalog(row, n=n), 1.3, 0.7, 0.4)[0] == pytest.approx(expected, rel=1e-13, abs=1e-300)

    def test_cubic_from_power_rows(self):
        # x^3 + x^2 + x has independent odd and even parts; x^2 = 2 * (x^2/2!)
        even = 4 * catalog_tau(Catalog(9, n=1), 1, 1, 0.25)[0]
        odd = tau_series(Taylor.polynomial([0, 1, 0, 1]), Taylor.polynomial([0, 1, 0, 1]), 1, 1, 0.25)[0]
        assert even + odd == pytest.approx(4.21875, rel=1e-15)

    def test_gaussian_two_widths(self):
        e = Catalog(11, a=1.0, b=2.0)
        fi = catalog_function(Catalog(11, a=1.0))
        fj = catalog_function(Catalog(11, a=2.0))
        ref = tau_quadrature(fi, fj, 1.5, 0.6, 0.5)[0]
        assert catalog_tau(e, 1.5, 0.6, 0.5)[0] == pytest.approx(ref, abs=1e-13)


@pytest.mark.parametrize("entry", TAYLOR_ROWS, ids=lambda e: f"row{e.entry}")
@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(0.2, 2.0), st.floats(-0.95, 0.95))
def test_catalog_matches_series(entry, a, b, r):
    f = catalog_taylor(entry)
    s = pd_triple(a, b, r)
    tau, err = tau_series(f, f, *s)
    assert catalog_tau(entry, *s)[0] == pytest.approx(tau, rel=1e-10, abs=err + 1e-14)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(0.2, 2.0), st.floats(-0.95, 0.95))
def test_gaussian_matches_fourier_integral(a, b, r):
    g = catalog_transform(Catalog(11, a=0.7)).g
    s = pd_triple(a, b, r)
    tau, err = tau_fourier_integral(g, g, *s)
    assert catalog_tau(Catalog(11, a=0.7), *s)[0] == pytest.approx(tau, abs=err + 1e-13)


@pytest.mark.parametrize("s", [-0.9, -0.25, 0.1, 0.25, 0.6, 0.9])
def test_indicator_rows(s):
    assert catalog_tau(Catalog(12), 1, 1, s)[0] == pytest.approx(indicator_cov(s), abs=1e-12)
    assert catalog_tau(Catalog(13), 1, 1, s)[0] == pytest.approx(x_indicator_cov(s), abs=1e-12)


class TestXIndicator:
    def test_oracle_value(self):
        tau = catalog_tau(Catalog(13), 1, 1, 0.25)[0]
        assert tau == pytest.approx(0.0105170168, abs=1e-10)

    def test_printed_series_disagrees(self):
        printed = x_indicator_printed_series(0.25)
        assert printed == pytest.approx(0.009876, abs=5e-7)
        assert abs(printed - x_indicator_cov(0.25)) > 6e-4


@pytest.mark.parametrize("row", range(1, 15))
def test_diag_and_mean_against_quadrature(row):
    defaults = {3: {"a": 2.0}, 4: {"a": 0.5}, 5: {"a": 1.0}, 6: {"a": 1.5}, 8: {"a": 1 / 3}, 9: {"n": 1}, 10: {"n": 2}, 11: {"a": 1.0}}
    e = Catalog(row, **defaults.get(row, {}))
    f = catalog_function(e)
    bp = catalog_breakpoints(e)
    assert catalog_tau_diag(e, 1.0)[0] == pytest.approx(tau_diag_quadrature(f, 1.0, breakpoints=bp)[0], abs=1e-12)
    assert catalog_nu(e, 1.0) == pytest.approx(nu_quadrature(f, 1.0, breakpoints=bp)[0], abs=1e-12)


class TestParity:
    @pytest.mark.parametrize("row", [1, 3, 5, 10, 13])
    def test_odd(self, row):
        e = Catalog(row, **({"a": 1.5} if row in (3, 5) else {"n": 1} if row == 10 else {}))
        odd, even = catalog_parity(e)
        assert odd is e and isinstance(even, Taylor)
        x = np.linspace(-2, 2, 11)
        np.testing.assert_allclose(catalog_function(e)(-x), -catalog_function(e)(x), atol=1e-15)

    def test_exp_split(self):
        odd, even = catalog_parity(Catalog(8, a=0.3))
        assert (odd.entry, even.entry) == (5, 6)

    def test_normal_cdf(self):
        with pytest.raises(UnsupportedRepresentation):
            catalog_parity(Catalog(14))


def test_normal_cdf_quadrature():
    f = catalog_function(Catalog(14))
    ref = tau_quadrature(f, f, 1, 1, 0.25)[0]
    assert catalog_tau(Catalog(14), 1, 1, 0.25)[0] == pytest.approx(ref, abs=1e-13)


def test_no_transform_for_smooth_rows():
    with pytest.raises(UnsupportedRepresentation):
        catalog_transform(Catalog(1))
    with pytest.raises(UnsupportedRepresentation):
        catalog_taylor(Catalog(12))
