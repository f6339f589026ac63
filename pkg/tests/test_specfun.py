"""Special functions: half-integer Bessel paths, Gamma, exterior eigenmodes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from extsobolev.errors import InvalidArgumentError, UnsupportedSectorError
from extsobolev.specfun import (BesselOrder, EigenmodeQuery, bessel_j,
                                bessel_j_halfint, bessel_y, bessel_y_halfint,
                                cross_product_zv, eigenmode, eigenmode_deriv,
                                eigenmode_values, gamma_fn)


class TestBesselOrder:
    def test_from_sector(self):
        assert BesselOrder.from_sector(3, 0).nu == 0.5
        assert BesselOrder.from_sector(5, 2).nu == 3.5

    def test_half_integer_flag(self):
        assert BesselOrder(2.5).is_half_integer
        assert not BesselOrder(1.3).is_half_integer

    def test_rejects_small_order(self):
        with pytest.raises(InvalidArgumentError):
            BesselOrder(0.3)

    def test_rejects_bad_sector(self):
        with pytest.raises(InvalidArgumentError):
            BesselOrder.from_sector(2, 0)
        with pytest.raises(InvalidArgumentError):
            BesselOrder.from_sector(3, -1)


class TestHalfIntegerPaths:
    """The trigonometric recurrences against scipy's AMOS implementation.

    Near-zero crossings the comparison uses the envelope sqrt(2/(pi x)) as
    the absolute scale.
    """

    @pytest.mark.parametrize("nu", [0.5, 1.5, 3.5, 7.5, 12.5])
    def test_j_matches_scipy(self, nu):
        x = np.geomspace(0.05, 80.0, 300)
        envelope = np.sqrt(2.0 / (np.pi * x))
        got = bessel_j_halfint(nu, x)
        want = sp.jv(nu, x)
        assert np.all(np.abs(got - want) < 1e-10 * (np.abs(want) + envelope))

    @pytest.mark.parametrize("nu", [0.5, 1.5, 3.5, 7.5])
    def test_y_matches_scipy(self, nu):
        x = np.geomspace(0.5, 80.0, 300)
        envelope = np.sqrt(2.0 / (np.pi * x))
        got = bessel_y_halfint(nu, x)
        want = sp.yv(nu, x)
        assert np.all(np.abs(got - want) < 1e-9 * (np.abs(want) + envelope))

    def test_j_downward_region(self):
        # nu > x exercises the Miller downward recurrence
        got = bessel_j_halfint(20.5, 3.0)
        want = sp.jv(20.5, 3.0)
        assert got == pytest.approx(want, rel=1e-10)

    def test_scalar_in_scalar_out(self):
        assert np.ndim(bessel_j_halfint(0.5, 2.0)) == 0

    def test_rejects_non_half_integer(self):
        with pytest.raises(InvalidArgumentError):
            bessel_j_halfint(1.2, 1.0)
        with pytest.raises(InvalidArgumentError):
            bessel_y_halfint(0.7, 1.0)

    def test_rejects_nonpositive_argument(self):
        with pytest.raises(InvalidArgumentError):
            bessel_j(0.5, 0.0)
        with pytest.raises(InvalidArgumentError):
            bessel_y(0.5, -1.0)

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(min_value=0, max_value=8),
           x=st.floats(min_value=0.2, max_value=50.0))
    def test_wronskian(self, n, x):
        # J_nu(x) Y_{nu+1}(x) - J_{nu+1}(x) Y_nu(x) = -2 / (pi x)
        nu = n + 0.5
        w = (bessel_j_halfint(nu, x) * bessel_y_halfint(nu + 1.0, x)
             - bessel_j_halfint(nu + 1.0, x) * bessel_y_halfint(nu, x))
        assert w == pytest.approx(-2.0 / (math.pi * x), rel=1e-8, abs=1e-12)


class TestGamma:
    def test_positive_values(self):
        assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)
        assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_reflection_for_negative_argument(self):
        x = -1.5
        want = math.pi / (math.sin(math.pi * x) * math.gamma(1.0 - x))
        assert gamma_fn(x) == pytest.approx(want, rel=1e-12)

    def test_pole_raises(self):
        for x in (0.0, -1.0, -2.0):
            with pytest.raises(InvalidArgumentError):
                gamma_fn(x)


class TestEigenmodes:
    def test_vanishes_at_boundary(self):
        for d, ell in ((3, 0), (3, 2), (4, 1), (5, 0)):
            for lam in (0.1, 1.0, 7.0):
                assert abs(eigenmode(EigenmodeQuery(d, ell, 1.0, lam))) < 1e-13

    def test_d3_closed_form(self):
        # at d=3, ell=0 the mode collapses to 2 sin(lam (r-1)) / (pi lam r)
        r = np.linspace(1.0, 12.0, 200)
        for lam in (0.05, 1.0, 9.0):
            got = eigenmode_values(3, 0, r, lam)
            want = 2.0 * np.sin(lam * (r - 1.0)) / (math.pi * lam * r)
            assert np.max(np.abs(got - want)) < 1e-12

    def test_cross_product_antisymmetric_in_r(self):
        # Z(nu, lam, 1) = 0 exactly by construction
        assert abs(cross_product_zv(1.5, 2.0, 1.0)) < 1e-14

    def test_deriv_matches_finite_difference(self):
        h = 1e-6
        for lam in (0.3, 2.0):
            for r in (1.001, 1.7, 4.2):
                got = eigenmode_deriv(EigenmodeQuery(3, 0, r, lam))
                up = eigenmode(EigenmodeQuery(3, 0, r + h, lam))
                dn = eigenmode(EigenmodeQuery(3, 0, r - h, lam))
                assert got == pytest.approx((up - dn) / (2.0 * h),
                                            rel=5e-5, abs=1e-7)

    def test_deriv_restricted_to_sector_zero(self):
        with pytest.raises(UnsupportedSectorError):
            eigenmode_deriv(EigenmodeQuery(3, 1, 2.0, 1.0))

    def test_query_validation(self):
        with pytest.raises(InvalidArgumentError):
            EigenmodeQuery(3, 0, 2.0, 0.0)
        with pytest.raises(InvalidArgumentError):
            EigenmodeQuery(2, 0, 2.0, 1.0)
        with pytest.raises(InvalidArgumentError):
            eigenmode(EigenmodeQuery(3, 0, 0.5, 1.0))
