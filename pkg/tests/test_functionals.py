import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gauss_deficit.families import (LogQuad, field_from_family,
                                    gaussian_ratio_field, symmetric_mixture)
from gauss_deficit.flows import MeasureSpec, fp_class_member
from gauss_deficit.functionals import (entropy_fisher, gross_psi,
                                       gross_psi_prime0, gross_slope,
                                       lp_norm_gaussian, q_functional,
                                       sharp_constant)
from gauss_deficit.numerics import (GridField, ParameterError, default_grid,
                                    default_grid_2d, gauss_hermite_rule)
from gauss_deficit.semigroups import ExponentTriple


def gaussian_relative_entropy_fisher(beta):
    """Closed forms for f = gamma_beta / gamma:
    Ent = (1/2)(beta - 1 - log beta), I = (beta - 1)^2 / beta."""
    ent = 0.5 * (beta - 1.0 - np.log(beta))
    fis = (beta - 1.0) ** 2 / beta
    return ent, fis


class TestEntropyFisher:
    @pytest.mark.parametrize("beta", [0.25, 0.5, 2.0, 4.0])
    def test_gaussian_closed_form(self, beta, grid, rule):
        f = gaussian_ratio_field(grid, beta)
        ef = entropy_fisher(f, rule)
        ent, fis = gaussian_relative_entropy_fisher(beta)
        assert ef.entropy == pytest.approx(ent, abs=1e-10)
        assert ef.fisher == pytest.approx(fis, abs=1e-9)

    def test_tensorization_2d(self, grid2, rule):
        beta = 2.0
        fam = LogQuad.gaussian_ratio(beta)

        def log_fn(x1, x2):
            return fam.log_at(x1) + fam.log_at(x2)

        f = GridField.from_callable(grid2,
                                    lambda a, b: np.exp(log_fn(a, b)),
                                    log_fn=log_fn)
        ef = entropy_fisher(f, gauss_hermite_rule(48))
        ent, fis = gaussian_relative_entropy_fisher(beta)
        assert ef.entropy == pytest.approx(2 * ent, abs=1e-8)
        assert ef.fisher == pytest.approx(2 * fis, abs=1e-7)

    def test_constant_has_zero_entropy(self, grid, rule):
        f = GridField.from_callable(grid, lambda x: np.full_like(
            np.asarray(x, float), 3.0))
        ef = entropy_fisher(f, rule)
        assert ef.entropy == pytest.approx(0, abs=1e-12)
        assert ef.fisher == pytest.approx(0, abs=1e-12)


class TestLpNorm:
    def test_matches_closed_form(self, grid, rule):
        f = gaussian_ratio_field(grid, 2.0)
        r = 1.5
        expect = np.exp(LogQuad.gaussian_ratio(2.0).log_lp_norm_gauss(r))
        assert lp_norm_gaussian(f, r, rule) == pytest.approx(expect,
                                                             rel=1e-10)


class TestSharpConstants:
    def test_lsi_gauss_value(self):
        # -(1/2)(log 2 - 1 + 1/2)
        sc = sharp_constant("lsi_gauss", beta=2.0)
        assert sc.value == pytest.approx(-0.0965735902799726, abs=1e-12)
        assert sharp_constant("dn", beta=2.0).value == pytest.approx(
            -sc.value, abs=1e-15)

    def test_lsi_gauss_tensorizes(self):
        one = sharp_constant("lsi_gauss", beta=3.0, n=1).value
        two = sharp_constant("lsi_gauss", beta=3.0, n=2).value
        assert two == pytest.approx(2 * one, rel=1e-14)

    def test_hc_ratio_value(self):
        t = ExponentTriple.from_pq(2.0, 4.0)
        sc = sharp_constant("hc_ratio", beta=2.0, triple=t)
        # beta^{1/(2p')} beta_s^{-1/(2q')} with beta_s = 5/3, p' = 2,
        # q' = 4/3
        expect = 2.0 ** 0.25 * (5.0 / 3.0) ** -0.375
        assert sc.value == pytest.approx(expect, rel=1e-14)
        assert sc.value == pytest.approx(0.9818931218485962, abs=1e-12)

    def test_talagrand_gauss(self):
        sc = sharp_constant("talagrand_gauss", beta=4.0)
        assert sc.value == pytest.approx(1 + 0.5 * np.log(4) - 2.0,
                                         rel=1e-14)

    def test_mikulincer_limit_and_comparison(self):
        assert sharp_constant("mikulincer", beta=1.0).value == 0.0
        for beta in (0.2, 0.5, 0.9):
            tala = sharp_constant("talagrand_gauss", beta=beta).value
            miku = sharp_constant("mikulincer", beta=beta).value
            assert tala < miku

    def test_beckner_b(self):
        sc = sharp_constant("beckner_b", p=1.5, beta=2.0)
        # beta^{n/p'} (1 + (beta-1) 2/p')^{-n/2} with p' = 3
        expect = 2.0 ** (1.0 / 3.0) * (5.0 / 3.0) ** -0.5
        assert sc.value == pytest.approx(expect, rel=1e-14)

    def test_hj_t(self):
        sc = sharp_constant("hj_t", tau=1.0, beta=2.0)
        assert sc.value == pytest.approx((np.exp(-1) * 2.25) ** 0.25,
                                         abs=1e-10)
        assert sharp_constant("hj_t", tau=1.0, beta=1.0).value == 1.0
        with pytest.raises(ParameterError):
            sharp_constant("hj_t", tau=1.0, beta=0.25)

    def test_hj_t_in_unit_interval(self):
        for beta in (1.5, 2.0, 5.0, 20.0):
            v = sharp_constant("hj_t", tau=1.0, beta=beta).value
            assert 0.0 < v < 1.0

    def test_bl_h(self):
        s = 0.5 * np.log(3.0)
        sc = sharp_constant("bl_h", c1=0.5, c2=0.75, s=s)
        expect = (2 * np.pi) ** (1 - 0.625) * np.sqrt(1 - 1 / 3)
        assert sc.value == pytest.approx(expect, rel=1e-14)

    def test_unknown_name_rejected(self):
        with pytest.raises(ParameterError):
            sharp_constant("nope", beta=2.0)


class TestGross:
    def test_psi_prime0_matches_finite_difference(self):
        beta = 2.0
        h = 1e-5
        fd = (gross_psi(beta, h) - gross_psi(beta, 0.0)) / h
        assert gross_psi_prime0(beta) == pytest.approx(fd, abs=1e-4)

    def test_psi_prime0_value(self):
        # -(n/4)(log beta - 1 + 1/beta)
        beta = 2.0
        assert gross_psi_prime0(beta) == pytest.approx(
            -0.25 * (np.log(2) - 0.5), rel=1e-12)


class TestQFunctional:
    def test_flat_at_gamma_beta(self, grid, rule):
        beta = 2.0
        v0 = field_from_family(grid, LogQuad.gaussian(beta))
        t = ExponentTriple.from_pq(2.0, 4.0)
        q0 = q_functional(v0, beta, t, 0.0, rule)
        q1 = q_functional(v0, beta, t, 0.5, rule)
        assert q1 == pytest.approx(q0, rel=1e-9)

    def test_monotone_on_fp_member(self, grid, rule):
        rng = np.random.default_rng(3)
        v0 = fp_class_member(
            MeasureSpec.discrete(rng.uniform(-2, 2, 4), np.ones(4) / 4),
            2.0, grid=grid)
        t = ExponentTriple.from_pq(2.0, 4.0)
        qs = [q_functional(v0, 2.0, t, s, rule) for s in (0.0, 0.3, 1.0)]
        assert qs[0] <= qs[1] + 1e-9 <= qs[2] + 2e-9
