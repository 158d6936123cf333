import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite_e
from oracles import erf_by_quadrature, hermite_direct, pairing_moment

from nonparanormal.errors import DegreeTooLarge, MomentOverflow
from nonparanormal.gaussian_kernel import (
    double_factorial,
    erf_phi,
    gaussian_moment,
    hermite,
    hermite_e_normalized,
    log_double_factorial,
    wick_mixed_moment,
)


def test_double_factorial():
    assert [double_factorial(m) for m in range(-1, 8)] == [1, 1, 1, 2, 3, 8, 15, 48, 105]


@pytest.mark.parametrize("m", [1, 7, 31, 99, 100])
def test_log_double_factorial(m):
    assert log_double_factorial(m) == pytest.approx(math.log(double_factorial(m)), rel=1e-13)


class TestGaussianMoment:
    def test_low_orders(self):
        assert gaussian_moment(0, 3.0) == 1.0
        assert gaussian_moment(2, 3.0) == 3.0
        assert gaussian_moment(4, 2.0) == 12.0
        assert gaussian_moment(7, 2.0) == 0.0

    def test_log_space_continuity(self):
        # order 42 uses the log path, 40 the exact one
        assert gaussian_moment(42, 1.1) / gaussian_moment(40, 1.1) == pytest.approx(41 * 1.1, rel=1e-12)

    def test_overflow(self):
        with pytest.raises(MomentOverflow):
            gaussian_moment(400, 10.0)


class TestWick:
    @pytest.mark.parametrize("p,q", [(p, q) for p in range(9) for q in range(9 - p)])
    def test_against_pairings(self, p, q):
        assert wick_mixed_moment(p, q, 1.3, 0.6, -0.4) == pytest.approx(
            pairing_moment(p, q, 1.3, 0.6, -0.4), rel=1e-13, abs=1e-15
        )

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(0, 6),
        st.integers(0, 6),
        st.floats(0.1, 3),
        st.floats(0.1, 3),
        st.floats(-0.99, 0.99),
    )
    def test_property_pairings(self, p, q, a, b, r):
        s = r * math.sqrt(a * b)
        assert wick_mixed_moment(p, q, a, b, s) == pytest.approx(pairing_moment(p, q, a, b, s), rel=1e-12, abs=1e-12)

    def test_symmetry(self):
        assert wick_mixed_moment(5, 3, 2.0, 0.5, 0.3) == wick_mixed_moment(3, 5, 0.5, 2.0, 0.3)

    def test_reduces_to_univariate(self):
        assert wick_mixed_moment(6, 0, 1.7, 1.0, 0.2) == pytest.approx(gaussian_moment(6, 1.7))

    def test_large_orders_log_path(self):
        # fully correlated: E[X^p X^q] = E[X^{p+q}]
        v = wick_mixed_moment(30, 32, 1.0, 1.0, 1.0)
        assert v == pytest.approx(gaussian_moment(62, 1.0), rel=1e-12)


class TestHermite:
    @pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 17])
    def test_direct_sum(self, n):
        for x in (-1.3, 0.0, 1 / math.sqrt(2), 2.2):
            assert hermite(n, x) == pytest.approx(hermite_direct(n, x), rel=1e-12, abs=1e-12)

    def test_vectorised(self):
        x = np.linspace(-2, 2, 5)
        np.testing.assert_allclose(hermite(4, x), [hermite(4, v) for v in x])

    def test_degree_cap(self):
        with pytest.raises(DegreeTooLarge):
            hermite(401, 0.5)

    def test_normalized_probabilists(self):
        vals = hermite_e_normalized(12, 1.0)
        for k in range(13):
            c = np.zeros(k + 1)
            c[k] = 1
            assert vals[k] == pytest.approx(hermite_e.hermeval(1.0, c) / math.sqrt(math.factorial(k)), rel=1e-12)

    def test_physicists_vs_probabilists(self):
        # H_n(x / sqrt 2) = 2^(n/2) He_n(x)
        he = hermite_e_normalized(9, 1.0)
        for n in range(10):
            assert hermite(n, 1 / math.sqrt(2)) == pytest.approx(
                2 ** (n / 2) * he[n] * math.sqrt(math.factorial(n)), rel=1e-12, abs=1e-13
            )


@pytest.mark.parametrize("z", [0.0, 0.1, 1 / math.sqrt(2), 1.0, 2.5])
def test_erf(z):
    assert erf_phi(z) == pytest.approx(erf_by_quadrature(z), rel=1e-14, abs=1e-16)
    np.testing.assert_allclose(erf_phi(np.array([z, -z])), [erf_phi(z), -erf_phi(z)], rtol=1e-15)


def test_counted_oracle_agrees_with_enumeration():
    from oracles import counted_moment

    for p in range(7):
        for q in range(7 - p):
            assert float(counted_moment(p, q, 1.3, 0.6, -0.4)) == pytest.approx(
                pairing_moment(p, q, 1.3, 0.6, -0.4), rel=1e-13, abs=1e-15
            )
