"""Riesz potentials, Hardy ratios, region weights, the Schur engine."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from extsobolev.domain import DomainKind
from extsobolev.errors import InvalidArgumentError
from extsobolev.inequalities import (WeightSpec, hardy_ratio,
                                     norm_equivalence_ratio, region_kernel,
                                     region_weight, riesz_constant,
                                     riesz_kernel, riesz_kernel_whole,
                                     riesz_shape_ratio, schur_bound,
                                     schur_lower_bound,
                                     schur_refinement_trend)
from conftest import make_bump


class TestRieszConstant:
    def test_newtonian_potential(self):
        # s = 2 at d = 3: the Green function 1 / (4 pi |x - y|)
        assert riesz_constant(3, 2.0) == pytest.approx(1.0 / (4.0 * math.pi),
                                                       rel=1e-12)

    def test_half_power(self):
        # s = 1 at d = 3: Gamma(1) / (2 pi^{3/2} Gamma(1/2)) = 1 / (2 pi^2)
        assert riesz_constant(3, 1.0) == pytest.approx(
            1.0 / (2.0 * math.pi ** 2), rel=1e-12)


class TestRieszKernel:
    def test_whole_space_matches_closed_form(self):
        for s in (0.5, 1.0, 2.0):
            for dist in (0.5, 1.0, 3.0):
                x = np.array([2.0, 0.0, 0.0])
                y = np.array([2.0 + dist, 0.0, 0.0])
                got = riesz_kernel(s, x, y, d=3,
                                   domain_kind=DomainKind.WHOLE_SPACE).value
                want = float(riesz_kernel_whole(3, s, x, y))
                # the s = 2 tail carries the largest truncation error
                assert got == pytest.approx(want, rel=5e-5)

    def test_exterior_below_whole_space(self):
        # domain monotonicity of the heat kernel passes to the potential
        x = np.array([1.5, 0.0, 0.0])
        y = np.array([0.0, 2.0, 0.0])
        ext = riesz_kernel(1.0, x, y, d=3).value
        whole = float(riesz_kernel_whole(3, 1.0, x, y))
        assert 0.0 < ext < whole

    def test_validation(self):
        x = np.array([2.0, 0.0, 0.0])
        with pytest.raises(InvalidArgumentError):
            riesz_kernel(3.5, x, 2.0 * x, d=3)
        with pytest.raises(InvalidArgumentError):
            riesz_kernel(1.0, x, x, d=3)
        with pytest.raises(InvalidArgumentError):
            riesz_kernel(1.0, np.array([0.5, 0, 0]), x, d=3)

    def test_shape_ratio_positive(self):
        x = np.array([1.3, 0.0, 0.0])
        y = np.array([0.0, 2.2, 0.0])
        assert riesz_shape_ratio(1.0, x, y, d=3) > 0.0


class TestHardyRatio:
    def test_euclidean_finite(self, bump):
        rep = hardy_ratio(bump, 0.5, 2.0, "euclidean")
        assert not rep.diverged
        assert 0.0 < rep.value < 10.0

    def test_dirichlet_finite(self, bump):
        rep = hardy_ratio(bump, 0.9, 2.0, "dirichlet")
        assert not rep.diverged
        assert 0.0 < rep.value < 10.0

    def test_validation(self, bump):
        with pytest.raises(InvalidArgumentError):
            hardy_ratio(bump, 0.5, 2.0, "neumann")
        with pytest.raises(InvalidArgumentError):
            hardy_ratio(bump, -0.5, 2.0, "euclidean")


class TestRegionWeights:
    @settings(max_examples=60, deadline=None)
    @given(p=st.floats(min_value=1.05, max_value=10.0),
           s=st.floats(min_value=0.05, max_value=2.0))
    def test_dist_ratio_window_empty_iff_supercritical(self, p, s):
        # the window (p(s-1), p'(2-s)) is empty exactly when s >= 1 + 1/p
        if abs(s - (1.0 + 1.0 / p)) < 1e-9:
            return  # skip the exact boundary: equality of float expressions
        spec = region_weight("Ic", p, s, 3)
        assert spec.admissible == (s < 1.0 + 1.0 / p)

    def test_unit_weight_regions(self):
        spec = region_weight("Ia", 2.0, 0.5, 3)
        assert spec.admissible
        assert float(spec(2.0, 3.0, 1.0)) == 1.0

    def test_mixed_region_splits_alpha(self):
        spec = region_weight("IIc", 2.0, 0.5, 3)
        assert spec.admissible
        assert spec.alpha1 + spec.alpha2 == pytest.approx(spec.alpha)

    def test_unknown_region(self):
        with pytest.raises(InvalidArgumentError):
            region_weight("IX", 2.0, 0.5, 3)
        with pytest.raises(InvalidArgumentError):
            region_kernel("IX", 0.5, 3)(2.0, 2.0, 1.0)

    def test_kernel_vanishes_outside_indicator(self):
        k = region_kernel("IIa", 1.0, 3)
        # region IIa needs dist > diam and both points far from the obstacle
        assert float(k(1.5, 1.5, 0.5)) == 0.0
        assert float(k(4.0, 8.0, 5.0)) > 0.0


class TestSchurEngine:
    def test_bound_converges_and_dominates(self):
        # small, fast configuration on the P62 kernel
        p, s = 2.0, 0.5
        weight = region_weight("P62", p, s, 3)
        kernel = region_kernel("P62", s, 3)
        rep = schur_bound(kernel, weight, p, 3, r_lo=1.0 + 2.0 ** -6,
                          n0=96, n_theta=24, refinements=3)
        assert rep.converged
        lower = schur_lower_bound(kernel, p, 3, r_lo=1.0 + 2.0 ** -6,
                                  n=192, n_theta=24, n_trials=40, seed=1)
        assert rep.bound >= lower > 0.0

    def test_rejects_empty_window(self):
        weight = region_weight("Ic", 2.0, 1.9, 3)  # s > 1 + 1/p: empty
        assert not weight.admissible
        with pytest.raises(InvalidArgumentError):
            schur_bound(region_kernel("Ic", 1.9, 3), weight, 2.0, 3)

    def test_trend_grows_outside_window(self):
        p, s = 2.0, 1.0
        kernel = region_kernel("IIa", s, 3)
        good = region_weight("IIa", p, s, 3)  # window (2, 4)
        bad = WeightSpec(family=good.family, alpha=good.window[1] + 0.6,
                         window=good.window, admissible=True)
        rows = schur_refinement_trend(kernel, bad, p, 3, levels=3, n0=64,
                                      n_theta=24)
        sups = [max(r["C0"], r["C1"]) for r in rows]
        assert sups[-1] > 2.0 * sups[0]

    def test_deterministic_lower_bound(self):
        kernel = region_kernel("IIa", 1.0, 3)
        a = schur_lower_bound(kernel, 2.0, 3, n=128, n_theta=16,
                              n_trials=20, seed=5)
        b = schur_lower_bound(kernel, 2.0, 3, n=128, n_theta=16,
                              n_trials=20, seed=5)
        assert a == b


class TestNormEquivalence:
    def test_exact_equality_case(self, bump):
        rep = norm_equivalence_ratio(bump, 1.0, 2.0)
        assert rep.value == pytest.approx(1.0, abs=1e-4)

    def test_s_zero_trivial(self, bump):
        assert norm_equivalence_ratio(bump, 0.0, 2.0).value == 1.0

    def test_requires_exterior_support(self):
        f = make_bump(center=1.0, width=0.8)
        with pytest.raises(InvalidArgumentError):
            norm_equivalence_ratio(f, 1.0, 2.0)
