"""Pair orders and the weak/strong rigidity experiments."""

import math

import numpy as np
import pytest

from diskflow import (
    AdmissibilityError,
    GeometricGrid,
    ValidationError,
    make_generator,
    order_exceeds,
    pair_order_estimate,
    same_trajectory_order,
    strong_rigidity_check,
    weak_rigidity_experiment,
)


class TestPairOrder:
    def test_identical_flows_above_all(self, fig4):
        rep = pair_order_estimate(fig4, fig4, 0.3, 0.3)
        assert rep.above_all
        assert rep.estimated_order == math.inf
        assert np.all(rep.gap_curve[:, 1] == 0.0)

    def test_differing_leading_terms_rejected(self, fig4):
        other = make_generator(2.0, 1.0, 1j, 0.5)
        with pytest.raises(ValidationError, match="leading"):
            pair_order_estimate(fig4, other, 0.3, 0.3)

    def test_symmetry(self, fig4):
        other = make_generator(1.0, 1.0, 1j + 0.1, 0.5)
        z1, z2 = 0.85 - 0.05j, 0.8 + 0.02j
        r_ab = pair_order_estimate(fig4, other, z1, z2)
        r_ba = pair_order_estimate(other, fig4, z2, z1)
        assert r_ab.estimated_order == pytest.approx(r_ba.estimated_order, abs=0.01)

    def test_perturbed_pair_order_is_beta(self, fig4):
        other = make_generator(1.0, 1.0, 1j + 0.1, 0.5)
        rep = pair_order_estimate(fig4, other, 0.85 - 0.05j, 0.85 - 0.05j)
        assert rep.estimated_order == pytest.approx(0.5, abs=0.05)
        assert rep.predicted_order == pytest.approx(0.5)
        assert rep.fit_r2 > 0.999 and not rep.unreliable

    def test_curve_columns(self, fig4):
        rep = pair_order_estimate(fig4, fig4, 0.3, 0.5j)
        t, d, gap = rep.gap_curve.T
        assert np.all(np.diff(t) > 0)
        assert np.all(gap > 0)
        assert np.all(d >= 0)

    def test_order_never_negative(self, fig4):
        other = make_generator(1.0, 1.0, 1j + 0.1, 0.5)
        rep = pair_order_estimate(fig4, other, 0.3, 0.3)
        assert rep.estimated_order >= 0.0


class TestOrderExceeds:
    def test_exact_zero_passes_everything(self, fig4):
        rep = pair_order_estimate(fig4, fig4, 0.3, 0.3)
        assert order_exceeds(rep.gap_curve, 10.0)

    def test_triangle_same_flow_exceeds_beta(self, fig4):
        # same semigroup, distinct points: pair order 1 > beta = 0.5; the
        # 1e-3 collapse of the scaled gap needs about seven decades of t
        grid = GeometricGrid.to_horizon(1.2e7, include_zero=False)
        rep = same_trajectory_order(fig4, 0.85 - 0.05j, 0.8 + 0.02j, t_grid=grid)
        assert order_exceeds(rep.gap_curve, fig4.beta)

    def test_perturbed_does_not_exceed(self, fig4):
        res = weak_rigidity_experiment(fig4, 0.1, 0.85 - 0.05j)
        assert not order_exceeds(res.report.gap_curve, fig4.beta)


class TestWeakRigidity:
    @pytest.mark.parametrize("c", [0.0, 0.1, -0.1, 0.1j])
    def test_biconditional(self, fig4, c):
        res = weak_rigidity_experiment(fig4, c, 0.85 - 0.05j)
        assert res.verdict == "RIGID-CONSISTENT"
        if c == 0:
            assert res.report.above_all
        else:
            assert res.report.estimated_order == pytest.approx(0.5, abs=0.05)

    def test_beta_above_alpha_rejected(self):
        g = make_generator(1.0, 1.0, 0.3, 1.5)
        with pytest.raises(ValidationError, match="beta"):
            weak_rigidity_experiment(g, 0.1, 0.3)

    def test_inadmissible_perturbation_surfaces(self, fig4):
        with pytest.raises(AdmissibilityError):
            weak_rigidity_experiment(fig4, 10j, 0.3)


class TestSameTrajectoryOrder:
    def test_identical_points_rejected(self, fig4):
        with pytest.raises(ValidationError):
            same_trajectory_order(fig4, 0.3, 0.3)

    def test_pure_scaled_check_exact(self):
        # quadratic: the half-plane difference is constant, so the scaled
        # check collapses to rounding noise
        g = make_generator(1.0, 1.0)
        rep = same_trajectory_order(g, 0.5, 0.3 + 0.1j)
        assert abs(complex(rep.scaled_check.value)) < 1e-9
        assert rep.estimated_order == pytest.approx(1.0, abs=0.01)

    def test_beta_less_check_vanishes(self, fig4):
        rep = same_trajectory_order(fig4, 0.85 - 0.05j, 0.8 + 0.02j)
        # t^(-1/2)-type tail: small against its own error bar or floor
        assert abs(complex(rep.scaled_check.value)) < 1e-3

    def test_beta_equal_check_decreases(self, gen_matrix):
        # 1/log t decay: assert decrease, not smallness
        g = gen_matrix["beta_equal"]
        rep = same_trajectory_order(g, 0.5, 0.3 + 0.1j)
        t, d, gap = rep.gap_curve.T
        scaled = d / (np.log(t + 1.0) * gap ** (1.0 + g.alpha))
        assert scaled[-1] < scaled[np.searchsorted(t, 10.0)]

    def test_beta_greater_prediction_interval(self, gen_matrix):
        g = gen_matrix["beta_greater"]
        rep = same_trajectory_order(g, 0.5, 0.3 + 0.1j)
        low, high = rep.predicted_order
        assert low == pytest.approx(g.alpha) and high == math.inf
        assert rep.estimated_order > g.alpha - 0.05


class TestStrongRigidity:
    ZS = [0.0, 0.3 + 0.2j, 0.85 - 0.05j]

    def test_same_flow_vanishes(self):
        g = make_generator(1.0, 1.0, 0.3j, 0.75)
        rep = strong_rigidity_check(g, make_generator(1.0, 1.0, 0.3j, 0.75), 0.3, self.ZS)
        assert rep.all_vanish
        assert rep.h_difference_spread == 0.0
        assert not rep.conjecture_probe

    def test_perturbed_detected_regime_one(self):
        g = make_generator(1.0, 1.0, 0.3j, 0.75)
        gp = make_generator(1.0, 1.0, 0.3j + 0.08, 0.75)
        rep = strong_rigidity_check(g, gp, 0.3, self.ZS)
        assert not rep.all_vanish
        assert rep.h_difference_spread > 1e-3

    def test_perturbed_detected_regime_two(self):
        # beta > alpha: the Koenigs difference dominates; limits are finite
        # and nonzero rather than divergent
        g = make_generator(1.0, 1.0, 0.3, 1.5)
        gp = make_generator(1.0, 1.0, 0.45, 1.5)
        rep = strong_rigidity_check(g, gp, 0.0, self.ZS)
        assert not rep.all_vanish
        assert any(
            not est.divergent and abs(complex(est.value)) > 1e-2
            for _, est in rep.per_point
        )

    def test_hypotheses_gate(self, fig4):
        # beta = alpha/2 sits exactly on the conjectured boundary
        gp = make_generator(1.0, 1.0, 1j + 0.1, 0.5)
        with pytest.raises(ValidationError, match="hypotheses"):
            strong_rigidity_check(fig4, gp, 0.3, self.ZS)
        rep = strong_rigidity_check(fig4, gp, 0.3, self.ZS, allow_conjecture_probe=True)
        assert rep.conjecture_probe
        assert not rep.all_vanish

    def test_theta_recorded(self):
        g = make_generator(1.0, 1.0, 0.3j, 0.75)
        rep = strong_rigidity_check(g, g, 1.25, [0.2])
        assert rep.theta == 1.25
