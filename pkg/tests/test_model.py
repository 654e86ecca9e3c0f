"""Parameter validation, utility, reduced-state dynamics, and the
annuitization payoff.  Oracles are hand arithmetic and finite differences."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from annuitize.errors import DomainError
from annuitize.model import (LaborParams, MarketParams, ModelParams,
                             PreferenceParams, drift_diffusion_y,
                             merton_weight, obstacle_G, obstacle_G_derivs,
                             utility, utility_dkappa, validate)
from annuitize.numerics import derivative_fd

PREFS = PreferenceParams(beta=0.03, gamma=2.0, psi=0.5, lbar=1.0,
                         alpha=0.9, rho=0.1)


def make_params(**overrides):
    kw = dict(market=MarketParams(r=0.02, mu=0.07, sigma=0.2),
              preferences=PREFS,
              labor=LaborParams(w=10.0, bbar=0.8),
              k=0.05, eta=0.05)
    kw.update(overrides)
    return ModelParams(**kw)


class TestValidate:
    def test_baseline_ok(self):
        assert validate(make_params()) == []

    def test_viability_violation(self):
        prefs = PreferenceParams(beta=0.03, gamma=2.0, psi=0.5, lbar=1.0,
                                 alpha=0.5, rho=0.1)
        # r = 0.02 < rho*(1-alpha) = 0.05
        assert "viability" in validate(make_params(preferences=prefs))

    def test_zero_volatility_violation(self):
        mkt = MarketParams(r=0.02, mu=0.07, sigma=0.0)
        assert "volatility positive" in validate(make_params(market=mkt))


class TestUtility:
    def test_all_unit_bases(self):
        assert utility(1.0, 0.0, PREFS) == pytest.approx(-1.0, abs=1e-14)

    def test_double_consumption(self):
        assert utility(2.0, 0.0, PREFS) == pytest.approx(-0.5, abs=1e-14)

    def test_high_labor(self):
        assert utility(1.0, 0.8, PREFS) == pytest.approx(
            -(0.2 ** -0.5), rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            utility(0.0, 0.0, PREFS)
        with pytest.raises(DomainError):
            utility(1.0, 1.0, PREFS)

    @given(st.floats(min_value=0.05, max_value=20.0),
           st.floats(min_value=0.05, max_value=20.0),
           st.floats(min_value=0.01, max_value=0.99),
           st.floats(min_value=0.0, max_value=0.79))
    def test_concavity_in_kappa(self, k1, k2, t, b):
        mix = utility(t * k1 + (1 - t) * k2, b, PREFS)
        chord = t * utility(k1, b, PREFS) + (1 - t) * utility(k2, b, PREFS)
        assert mix >= chord - 1e-9 * (abs(mix) + 1.0)

    @given(st.floats(min_value=0.1, max_value=10.0),
           st.floats(min_value=0.0, max_value=0.7))
    def test_marginal_consumption_matches_fd(self, kappa, b):
        closed = utility_dkappa(kappa, b, PREFS)
        fd = derivative_fd(lambda t: utility(t, b, PREFS), kappa)
        assert closed == pytest.approx(fd, rel=1e-6)

    def test_monotone(self):
        assert utility(2.0, 0.0, PREFS) > utility(1.0, 0.0, PREFS)
        assert utility(1.0, 0.5, PREFS) < utility(1.0, 0.0, PREFS)


class TestDriftDiffusion:
    def test_hand_arithmetic(self):
        params = make_params()
        drift, diff = drift_diffusion_y(1.0, 0.0, 1.0, 0.0, params)
        # (r + rho)*y - kappa*(1 + rho*y) = 0.12 - 1.1
        assert drift == pytest.approx(-0.98, abs=1e-14)
        assert diff == 0.0

    def test_zero_portfolio_kills_diffusion(self):
        params = make_params()
        for y in (0.1, 1.0, 50.0):
            assert drift_diffusion_y(y, 0.0, 1.0, 0.3, params)[1] == 0.0

    def test_origin_habit_floor(self):
        params = make_params()
        drift, diff = drift_diffusion_y(0.0, 0.4, 0.9, 0.0, params)
        assert drift == pytest.approx(-0.9, abs=1e-14)
        assert diff == 0.0

    def test_affine_coefficients(self):
        """Unit perturbations recover the analytic control coefficients."""
        params = make_params()
        y, p, kappa, b = 2.0, 0.3, 1.5, 0.4
        base = drift_diffusion_y(y, p, kappa, b, params)[0]
        dp = drift_diffusion_y(y, p + 1.0, kappa, b, params)[0] - base
        dk = drift_diffusion_y(y, p, kappa + 1.0, b, params)[0] - base
        db = drift_diffusion_y(y, p, kappa, b + 1.0, params)[0] - base
        mkt, pref, lab = params.market, params.preferences, params.labor
        assert dp == pytest.approx(y * (mkt.mu - mkt.r), abs=1e-12)
        assert dk == pytest.approx(-(1.0 + pref.rho * y), abs=1e-12)
        assert db == pytest.approx(lab.w, abs=1e-12)


class TestObstacle:
    def test_hand_values(self):
        params = make_params()
        assert obstacle_G(1.0, params) == pytest.approx(-400.0, rel=1e-12)
        assert obstacle_G(2.0, params) == pytest.approx(-200.0, rel=1e-12)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            obstacle_G(0.0, make_params())

    @pytest.mark.parametrize("y", [0.5, 1.0, 5.0])
    def test_derivatives_match_fd(self, y):
        params = make_params()
        G, G1, G2 = obstacle_G_derivs(y, params)
        assert G == pytest.approx(obstacle_G(y, params), rel=1e-14)
        assert G1 == pytest.approx(
            derivative_fd(lambda t: obstacle_G(t, params), y), rel=1e-6)
        assert G2 == pytest.approx(
            derivative_fd(lambda t: obstacle_G(t, params), y, order=2),
            rel=1e-4)

    @given(st.floats(min_value=0.1, max_value=20.0),
           st.floats(min_value=0.1, max_value=10.0))
    def test_homogeneity(self, y, c):
        params = make_params()
        g = params.preferences.gamma
        assert obstacle_G(c * y, params) == pytest.approx(
            c ** (1.0 - g) * obstacle_G(y, params), rel=1e-10)


class TestMertonWeight:
    def test_baseline(self):
        assert merton_weight(make_params()) == pytest.approx(0.625, abs=1e-14)

    def test_zero_risk_premium(self):
        mkt = MarketParams(r=0.02, mu=0.02, sigma=0.2)
        assert merton_weight(make_params(market=mkt)) == 0.0

    def test_inverse_in_gamma(self):
        prefs = PreferenceParams(beta=0.03, gamma=4.0, psi=0.5, lbar=1.0,
                                 alpha=0.9, rho=0.1)
        assert merton_weight(make_params(preferences=prefs)) == pytest.approx(
            0.3125, abs=1e-14)
