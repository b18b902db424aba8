import numpy as np
import pytest

from gauss_deficit.hamilton_jacobi import (HJField, beta_of_a,
                                           dual_talagrand_check, hj_hc_check,
                                           hopf_lax, hopf_lax_quadratic,
                                           quadratic_datum,
                                           vanishing_viscosity)
from gauss_deficit.numerics import GridField, ParameterError, default_grid


def abs_datum(grid):
    return HJField.from_field(GridField(grid, np.abs(grid.points)))


def perturbed_datum(grid, a, beta, c=0.03, m=0.4):
    """Extremiser quadratic plus a small convex bump; stays admissible."""
    base = quadratic_datum(a, beta_of_a(a, beta), grid)
    x = grid.points
    vals = base.f.values + c * np.log(np.cosh(x - m))
    return HJField.from_field(GridField(grid, vals))


class TestHopfLax:
    def test_moreau_envelope_of_abs(self, grid):
        # Q_tau |x| = x^2/(2 tau) on |x| <= tau, |x| - tau/2 outside
        tau = 1.0
        q = hopf_lax(abs_datum(grid), tau)
        x = grid.points
        exact = np.where(np.abs(x) <= tau, x * x / (2 * tau),
                         np.abs(x) - tau / 2)
        mask = np.abs(x) <= 10
        assert np.max(np.abs(q.values[mask] - exact[mask])) < 5e-6

    def test_constant_datum_fixed(self, grid):
        f = HJField.from_field(GridField(grid, np.full(grid.n, 1.7)))
        q = hopf_lax(f, 0.7)
        np.testing.assert_allclose(q.values, 1.7, atol=1e-12)

    def test_dominated_by_datum(self, grid):
        f = abs_datum(grid)
        q = hopf_lax(f, 0.5)
        assert np.all(q.values <= f.f.values + 1e-12)

    def test_quadratic_closed_form(self, grid):
        a, alpha, tau = 1.0, 2.0, 1.0
        q = hopf_lax(quadratic_datum(a, alpha, grid), tau)
        coef, const = hopf_lax_quadratic(a, alpha, tau)
        x = grid.points
        exact = 0.5 * coef * x * x + const
        mask = np.abs(x) <= 10
        assert np.max(np.abs(q.values[mask] - exact[mask])) < 1e-8

    def test_semigroup_property(self, small_grid):
        f = quadratic_datum(1.0, 3.0, small_grid)
        q_direct = hopf_lax(f, 0.8)
        q_half = hopf_lax(f, 0.5)
        q_chain = hopf_lax(HJField.from_field(q_half), 0.3)
        x = small_grid.points
        mask = np.abs(x) <= 8
        assert np.max(np.abs(q_chain.values[mask]
                             - q_direct.values[mask])) < 1e-4

    def test_rejects_nonpositive_tau(self, grid):
        with pytest.raises(ParameterError):
            hopf_lax(abs_datum(grid), 0.0)


class TestVanishingViscosity:
    def test_constant_datum_exact(self, grid, rule):
        f = HJField.from_field(GridField(grid, np.full(grid.n, -0.4)))
        u = vanishing_viscosity(f, 0.1, 1.0, rule)
        np.testing.assert_allclose(u.values, -0.4, atol=1e-10)

    def test_converges_to_hopf_lax(self, grid, rule):
        f = quadratic_datum(1.0, 2.0, grid)
        q = hopf_lax(f, 1.0)
        x = grid.points
        mask = np.abs(x) <= 2
        gaps = []
        for eps in (0.2, 0.1, 0.05):
            u = vanishing_viscosity(f, eps, 1.0, rule)
            gaps.append(np.max(np.abs(u.values[mask] - q.values[mask])))
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.05

    def test_rejects_nonpositive_parameters(self, grid):
        f = abs_datum(grid)
        with pytest.raises(ParameterError):
            vanishing_viscosity(f, 0.0, 1.0)
        with pytest.raises(ParameterError):
            vanishing_viscosity(f, 0.1, -1.0)


class TestQuadraticHelpers:
    def test_beta_of_a(self):
        assert beta_of_a(1.0, 2.0) == pytest.approx(2.0)
        assert beta_of_a(0.5, 2.0) == pytest.approx(4.0 / 3.0)
        with pytest.raises(ParameterError):
            beta_of_a(2.0, 4.0)  # 1 - 2(3/4) < 0

    def test_quadratic_datum_validation(self, grid):
        with pytest.raises(ParameterError):
            quadratic_datum(-1.0, 2.0, grid)
        with pytest.raises(ParameterError):
            quadratic_datum(1.0, 0.0, grid)


class TestHJHypercontractivity:
    def test_extremiser_zero_slack(self, grid, rule):
        a, tau, beta = 1.0, 1.0, 2.0
        f = quadratic_datum(a, beta_of_a(a, beta), grid)
        r = hj_hc_check(f, a, tau, beta, rule)
        assert r.asserted
        assert r.slack == pytest.approx(0, abs=1e-4)

    def test_perturbed_positive_slack(self, grid, rule):
        f = perturbed_datum(grid, 1.0, 2.0)
        r = hj_hc_check(f, 1.0, 1.0, 2.0, rule)
        assert r.asserted
        assert r.slack >= -1e-4

    def test_inadmissible_parameters(self, grid, rule):
        f = quadratic_datum(1.0, 2.0, grid)
        with pytest.raises(ParameterError):
            hj_hc_check(f, 1.0, 1.0, 0.5, rule)  # beta <= 1
        with pytest.raises(ParameterError):
            hj_hc_check(f, 4.0, 1.0, 2.0, rule)  # beta(1 - 1/a) >= 1
        with pytest.raises(ParameterError):
            hj_hc_check(f, -1.0, 1.0, 2.0, rule)

    def test_flat_datum_not_asserted(self, grid, rule):
        # a flat datum fails the curvature hypothesis at beta = 2
        f = HJField.from_field(GridField(grid, np.zeros(grid.n)))
        r = hj_hc_check(f, 1.0, 1.0, 2.0, rule)
        assert not r.asserted


class TestDualTalagrand:
    def test_extremiser_near_zero_slack(self, grid, rule):
        a0, beta = 0.02, 2.0
        f = quadratic_datum(a0, beta_of_a(a0, beta), grid)
        r = dual_talagrand_check(f, 1.0, beta, rule)
        assert r.asserted
        assert r.slack == pytest.approx(0, abs=1e-4)
        assert abs(r.params["t_limit_gap"]) < 2e-2

    def test_perturbed_positive_slack(self, grid, rule):
        f = perturbed_datum(grid, 0.02, 2.0, c=0.02)
        r = dual_talagrand_check(f, 1.0, 2.0, rule)
        assert r.asserted
        assert r.slack >= -1e-4

    def test_requires_beta_above_one(self, grid, rule):
        f = quadratic_datum(0.02, 1.01, grid)
        with pytest.raises(ParameterError):
            dual_talagrand_check(f, 1.0, 1.0, rule)
        with pytest.raises(ParameterError):
            dual_talagrand_check(f, 0.0, 2.0, rule)
