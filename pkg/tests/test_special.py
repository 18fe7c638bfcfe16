"""Bessel and Hankel implementations against mpmath."""

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trefftzvem import special

mpmath.mp.dps = 40

# sample both series and asymptotic branches, including the switch point
SAMPLE_X = np.array([1e-8, 0.01, 0.5, 1.0, 4.0, 11.0, 11.999, 12.001,
                     13.0, 30.0, 120.0])


def mp_jv(nu, x):
    return float(mpmath.besselj(nu, x))


def mp_yn(n, x):
    return float(mpmath.bessely(n, x))


class TestBesselJ:
    @pytest.mark.parametrize("nu", [0.0, 1.0, 2.0 / 3.0, -1.0 / 3.0, 0.5])
    def test_against_mpmath(self, nu):
        x = SAMPLE_X if nu >= 0 else SAMPLE_X[SAMPLE_X > 0]
        got = special.besselj(nu, x)
        ref = np.array([mp_jv(nu, xi) for xi in x])
        scale = np.maximum(np.abs(ref), 1e-3)
        assert np.max(np.abs(got - ref) / scale) < 2e-11

    def test_at_zero(self):
        assert special.besselj(0.0, 0.0) == pytest.approx(1.0)
        assert special.besselj(2.0 / 3.0, 0.0) == 0.0

    def test_scalar_in_scalar_out(self):
        out = special.besselj(0.0, 1.5)
        assert np.ndim(out) == 0

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            special.besselj(0.0, -1.0)

    def test_negative_order_at_zero_rejected(self):
        with pytest.raises(ValueError):
            special.besselj(-1.0 / 3.0, np.array([0.0, 1.0]))

    @given(st.floats(min_value=1e-3, max_value=100.0))
    @settings(max_examples=40, deadline=None)
    def test_wronskian(self, x):
        # J_{nu+1}(x) J_{-nu-1+1}... use J_nu Y'_nu - J'_nu Y_nu = 2/(pi x)
        j0 = special.besselj(0.0, x)
        j1 = special.besselj(1.0, x)
        y0 = special.bessely(0, x)
        y1 = special.bessely(1, x)
        # J0 Y0' - J0' Y0 with f0' = -f1
        w = -j0 * y1 + j1 * y0
        assert w == pytest.approx(2.0 / (np.pi * x), rel=3e-10, abs=1e-12)


class TestBesselY:
    @pytest.mark.parametrize("n", [0, 1])
    def test_against_mpmath(self, n):
        x = SAMPLE_X[SAMPLE_X > 0]
        got = special.bessely(n, x)
        ref = np.array([mp_yn(n, xi) for xi in x])
        scale = np.maximum(np.abs(ref), 1e-3)
        assert np.max(np.abs(got - ref) / scale) < 2e-11

    def test_requires_positive_argument(self):
        with pytest.raises(ValueError):
            special.bessely(0, 0.0)

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            special.bessely(2, 1.0)


class TestHankel:
    def test_combines_j_and_y(self):
        x = np.array([0.3, 2.0, 25.0])
        h = special.hankel1(0, x)
        assert np.allclose(h.real, special.besselj(0.0, x))
        assert np.allclose(h.imag, special.bessely(0, x))

    def test_outgoing_amplitude(self):
        # |H0(x)| ~ sqrt(2 / (pi x)) for large x
        x = 200.0
        assert abs(special.hankel1(0, x)) == pytest.approx(
            np.sqrt(2.0 / (np.pi * x)), rel=1e-3)


class TestBesseljDeriv:
    @pytest.mark.parametrize("nu", [2.0 / 3.0, 1.0, 0.0])
    def test_against_mpmath_derivative(self, nu):
        x = np.array([0.05, 0.8, 5.0, 20.0])
        got = special.besselj_deriv(nu, x)
        ref = np.array(
            [float(mpmath.diff(lambda t: mpmath.besselj(nu, t), xi))
             for xi in x])
        assert np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-3)) < 1e-9

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            special.besselj_deriv(2.0 / 3.0, 0.0)
