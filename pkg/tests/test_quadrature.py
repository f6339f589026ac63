"""Adaptive integration, semi-infinite integrals, divergence detection, norms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from extsobolev.domain import RadialFunction
from extsobolev.errors import InvalidArgumentError
from extsobolev.quadrature import (GaussianDecay, OscillatoryDamped,
                                   PowerDecay, RadialMeasure, angular_integral,
                                   detect_divergence, full_sphere_angular,
                                   integrate, integrate_panels,
                                   integrate_semiinfinite, lp_norm_radial)


class TestIntegrate:
    def test_polynomial_exact(self):
        res = integrate(lambda x: x * x, 0.0, 1.0)
        assert res.value == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert res.evaluations > 0

    def test_oscillatory(self):
        res = integrate(lambda x: math.sin(10.0 * x), 0.0, 2.0 * math.pi)
        assert abs(res.value) < 1e-10

    def test_endpoint_singularity(self):
        res = integrate(lambda x: x ** -0.5, 0.0, 1.0, singular_at=0.0)
        assert res.value == pytest.approx(2.0, rel=1e-9)
        res = integrate(lambda x: (1.0 - x) ** -0.5, 0.0, 1.0, singular_at=1.0)
        assert res.value == pytest.approx(2.0, rel=1e-9)

    def test_interior_singular_at_rejected(self):
        with pytest.raises(InvalidArgumentError):
            integrate(lambda x: x, 0.0, 1.0, singular_at=0.5)

    def test_bad_interval(self):
        with pytest.raises(InvalidArgumentError):
            integrate(lambda x: x, 1.0, 0.0)

    def test_error_estimate_finite(self):
        res = integrate(lambda x: math.exp(-x * x), -3.0, 3.0)
        assert res.abs_error_estimate < 1e-8


class TestSemiInfinite:
    def test_gaussian_decay(self):
        res = integrate_semiinfinite(lambda x: math.exp(-x * x), 0.0,
                                     decay=GaussianDecay(sigma=1.0))
        assert res.value == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-9)

    def test_power_decay(self):
        res = integrate_semiinfinite(lambda x: (1.0 + x) ** -2.0, 0.0,
                                     decay=PowerDecay(q=2.0))
        assert res.value == pytest.approx(1.0, rel=1e-7)

    def test_oscillatory_damped_truncates(self):
        res = integrate_semiinfinite(
            lambda x: math.exp(-x) * math.cos(x), 0.0,
            decay=OscillatoryDamped(lambda_max=60.0))
        assert res.value == pytest.approx(0.5, rel=1e-8)

    def test_unknown_decay(self):
        with pytest.raises(InvalidArgumentError):
            integrate_semiinfinite(lambda x: x, 0.0, decay="fast")


class TestDetectDivergence:
    def test_power_divergence(self):
        diverged, slope, _ = detect_divergence(lambda dl: dl ** -0.5)
        assert diverged
        assert slope == pytest.approx(0.5, abs=0.05)

    def test_convergent_partials(self):
        diverged, slope, _ = detect_divergence(lambda dl: 1.0 - dl)
        assert not diverged
        assert slope == 0.0


class TestRadialMeasure:
    def test_sphere_constant_d3(self):
        assert RadialMeasure(3, 0.0).sphere_constant == \
            pytest.approx(4.0 * math.pi, rel=1e-14)

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            RadialMeasure(2, 0.0)
        with pytest.raises(InvalidArgumentError):
            RadialMeasure(3, 0.5)


class TestLpNorm:
    def test_gaussian_l2_closed_form(self):
        f = RadialFunction(func=lambda r: np.exp(-r * r), d=3,
                           support=(0.0, 12.0), decay="gaussian")
        got = lp_norm_radial(f, 2.0, RadialMeasure(3, 0.0))
        # ||f||_2^2 = 4 pi int r^2 e^{-2 r^2} dr = pi^{3/2} / (2 sqrt 2)
        want = math.sqrt(math.pi ** 1.5 / (2.0 * math.sqrt(2.0)))
        assert got.value == pytest.approx(want, rel=1e-9)
        assert not got.diverged

    def test_divergent_weight_reported(self):
        f = RadialFunction(func=lambda r: np.exp(-(r - 1.0)), d=3,
                           support=(1.0, 30.0))
        got = lp_norm_radial(f, 2.0, RadialMeasure(3, 1.0),
                             weight=lambda r: (np.asarray(r) - 1.0) ** -1.0,
                             singular_inner=True)
        assert got.diverged
        assert got.value == math.inf
        # density ~ (r-1)^{-2} so partials grow like 1/delta
        assert got.details["growth_exponent"] == pytest.approx(1.0, abs=0.15)

    def test_rejects_bad_p(self):
        f = RadialFunction(func=lambda r: np.exp(-r), d=3, support=(0.0, 10.0))
        with pytest.raises(InvalidArgumentError):
            lp_norm_radial(f, 1.0, RadialMeasure(3, 0.0))

    @settings(max_examples=20, deadline=None)
    @given(c=st.floats(min_value=0.01, max_value=100.0),
           p=st.floats(min_value=1.1, max_value=6.0))
    def test_homogeneity(self, c, p):
        f = RadialFunction(func=lambda r: np.exp(-r * r), d=3,
                           support=(0.0, 10.0))
        m = RadialMeasure(3, 0.0)
        base = lp_norm_radial(f, p, m).value
        scaled = lp_norm_radial(f.scaled(c), p, m).value
        assert scaled == pytest.approx(c * base, rel=1e-7)


class TestAngular:
    def test_full_sphere_matches_quadrature(self):
        for d in (3, 4, 5, 7):
            res = angular_integral(lambda th: 1.0, d)
            assert res.value == pytest.approx(full_sphere_angular(d), rel=1e-10)

    def test_rejects_low_dimension(self):
        with pytest.raises(InvalidArgumentError):
            angular_integral(lambda th: 1.0, 2)


class TestIntegratePanels:
    def test_matches_scalar_quadrature(self):
        val, err, _n = integrate_panels(lambda x: np.sin(x) ** 2, 0.0, 5.0)
        want = integrate(lambda x: math.sin(x) ** 2, 0.0, 5.0).value
        assert val == pytest.approx(want, rel=1e-9)
        assert err < 1e-8

    def test_vector_valued_integrand(self):
        # shape (2, n_nodes): two integrals in one pass
        def fvec(x):
            return np.stack([np.ones_like(x), x])

        val, _e, _n = integrate_panels(fvec, 0.0, 2.0)
        assert val[0] == pytest.approx(2.0, rel=1e-12)
        assert val[1] == pytest.approx(2.0, rel=1e-12)
