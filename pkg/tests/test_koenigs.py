"""Koenigs maps: defining ODEs, closed forms, shift constants, Abel property."""

import numpy as np
import pytest

from diskflow import (
    ValidationError,
    cayley,
    evaluator_for,
    flow_at,
    make_generator,
)


class TestDefiningEquations:
    def test_h_prime_f_is_one(self, gen_matrix, disk_points):
        for name, g in gen_matrix.items():
            ev = evaluator_for(g)
            for z in disk_points[:3]:
                assert ev.h_prime(z) * g.f(z) == pytest.approx(1.0, rel=1e-9), name

    def test_h_vanishes_at_origin(self, gen_matrix):
        for name, g in gen_matrix.items():
            assert abs(evaluator_for(g).h(0.0)) < 1e-12, name

    def test_sigma_prime_phi_is_one(self, fig4):
        ev = evaluator_for(fig4)
        w = 2.0 + 0.5j
        assert ev.sigma_prime(w) * fig4.phi(w) == pytest.approx(1.0, rel=1e-9)

    def test_sigma_vanishes_at_one(self, fig4):
        assert abs(evaluator_for(fig4).sigma(1.0)) < 1e-12

    def test_halfplane_disk_consistency(self, fig4):
        # sigma(C(z)) and h(z) linearize the same flow: they differ by a
        # constant, which h(0) = sigma(1) = 0 kills
        ev = evaluator_for(fig4)
        for z in (0.2, 0.3 + 0.2j):
            assert ev.sigma(cayley(z)) == pytest.approx(ev.h(z), rel=1e-9)


class TestPureClosedForms:
    def test_h_pure(self):
        g = make_generator(1.0, 1.5)
        ev = evaluator_for(g)
        z = 0.3 - 0.2j
        s0 = (2.0 / (1.0 - z)) ** 1.5
        assert ev.h(z) == pytest.approx((s0 - 2.0**1.5) / g.lam, rel=1e-12)

    def test_sigma_pure(self):
        g = make_generator(1.0, 1.5)
        ev = evaluator_for(g)
        w = 1.2 + 0.4j
        expect = ((w + 1.0) ** 1.5 - 2.0**1.5) / g.lam
        assert ev.sigma(w) == pytest.approx(expect, rel=1e-12)


class TestShiftedMaps:
    def test_shift_requires_beta_greater(self, fig4):
        ev = evaluator_for(fig4)  # beta < alpha: no shifted system
        with pytest.raises(ValidationError):
            ev.h1(0.3)
        with pytest.raises(ValidationError):
            ev.sigma1(1.5)

    def test_c1_oracle_two_term(self):
        # frozen independent quadrature oracle (mpmath, 30 digits) for the
        # correction constant of a = 1, alpha = 1, b = 0.3, beta = 1.2
        # quadrature reaches ~1e-8 here (endpoint truncation ladder)
        g = make_generator(1.0, 1.0, 0.3, 1.2)
        ev = evaluator_for(g)
        assert ev.c1 == pytest.approx(-1.44435925224590758, rel=1e-7)

    def test_c1_frame_agreement(self):
        g = make_generator(1.0, 1.0, 0.3, 1.2)
        ev = evaluator_for(g)
        assert ev.c1_halfplane == pytest.approx(ev.c1, rel=1e-8)
        assert ev.c1_spread < 1e-7

    def test_rational_h1_closed_form(self, gen_matrix):
        # h1(z) = 4z/(1-z) + i z + (4 - i) for the rational model: the
        # correction integrand h' - 1/(a (1-s)^2) is identically i, and
        # 2^alpha / lambda = 4
        g = gen_matrix["rational"]
        ev = evaluator_for(g)
        for z in (0.0, 0.3, 0.2 - 0.4j):
            expect = 4.0 * z / (1.0 - z) + 1j * z + (4.0 - 1j)
            assert ev.h1(z) == pytest.approx(expect, rel=1e-10)

    def test_shift_constant_consistency(self, gen_matrix):
        # h1 = h + 2^alpha/lam - c1 by construction
        g = gen_matrix["beta_greater"]
        ev = evaluator_for(g)
        z = 0.25 + 0.15j
        assert ev.h1(z) == pytest.approx(
            ev.h(z) + 2.0**g.alpha / g.lam - ev.c1, rel=1e-10
        )

    def test_sigma1_matches_h1_through_cayley(self, gen_matrix):
        # both shifted maps carry the same constant, so sigma1 o C = h1
        g = gen_matrix["beta_greater"]
        ev = evaluator_for(g)
        z = 0.25 + 0.15j
        assert ev.sigma1(cayley(z)) == pytest.approx(ev.h1(z), rel=1e-9)

    def test_pure_generator_has_no_evaluator_shift(self):
        # pure power: the shifted map is the closed form s0/lam at call
        # sites; the evaluator's shift system stays gated on beta > alpha
        ev = evaluator_for(make_generator(1.0, 1.5))
        assert ev.c1 is None
        with pytest.raises(ValidationError):
            ev.sigma1(1.7 + 0.2j)


class TestAbelProperty:
    def test_h_advances_by_t(self, gen_matrix):
        # h(F_t(z)) - h(z) = t: the defining property of the Koenigs map
        for name, g in gen_matrix.items():
            ev = evaluator_for(g)
            z0 = 0.3 + 0.1j
            for t in (1.0, 100.0):
                zt = flow_at(g, z0, t)
                resid = abs(ev.h(zt) - ev.h(z0) - t)
                assert resid < 1e-6 * (1.0 + t), (name, t, resid)
