"""Mortality laws, discounting, and annuity pricing.

Oracles are closed forms (constant-force exponentials, Gompertz survival)
and independent quadrature/Simpson integration of the defining integrals.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annuitize.errors import ConfigError, DomainError
from annuitize.mortality import (ConstantForce, DiscountSpec, GompertzParams,
                                 annuity_factor, conditional_survival,
                                 cumulative_discount, effective_rate,
                                 fair_rate, force_of_mortality,
                                 integrated_hazard, npr, premium, survival)

GOMPERTZ = GompertzParams(n=60, m=80, lam=10)


def quad_survival(law, t, n=20001):
    """Simpson integration of the hazard, independent of the closed form."""
    ts = np.linspace(0.0, t, n)
    hz = np.array([force_of_mortality(law, float(u)) for u in ts])
    from scipy.integrate import simpson
    return math.exp(-simpson(hz, x=ts))


class TestForceOfMortality:
    def test_gompertz_at_modal_age(self):
        # n + t = m makes the exponent vanish
        assert force_of_mortality(GOMPERTZ, 20.0) == pytest.approx(0.1, abs=1e-14)

    def test_gompertz_at_entry(self):
        assert force_of_mortality(GOMPERTZ, 0.0) == pytest.approx(
            0.1 * math.exp(-2.0), rel=1e-12)

    def test_constant(self):
        law = ConstantForce(delta=0.02)
        for t in (0.0, 1.0, 37.5):
            assert force_of_mortality(law, t) == 0.02

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            force_of_mortality(GOMPERTZ, -1.0)

    @given(st.floats(min_value=0.0, max_value=50.0),
           st.floats(min_value=0.01, max_value=10.0))
    def test_gompertz_strictly_increasing(self, t, dt):
        assert (force_of_mortality(GOMPERTZ, t + dt)
                > force_of_mortality(GOMPERTZ, t))


class TestSurvival:
    def test_zero_horizon(self):
        assert survival(GOMPERTZ, 0.0) == 1.0
        assert survival(ConstantForce(delta=0.05), 0.0) == 1.0

    def test_constant_closed_form(self):
        assert survival(ConstantForce(delta=0.02), 10.0) == pytest.approx(
            math.exp(-0.2), rel=1e-14)

    def test_gompertz_vs_quadrature(self):
        s = survival(GOMPERTZ, 20.0)
        assert s == pytest.approx(0.4212, abs=5e-4)
        assert s == pytest.approx(quad_survival(GOMPERTZ, 20.0), abs=1e-8)

    @pytest.mark.parametrize("t", [1.0, 5.0, 10.0, 20.0, 40.0])
    def test_closed_form_matches_hazard_integral(self, t):
        direct = math.exp(-integrated_hazard(GOMPERTZ, t))
        assert survival(GOMPERTZ, t) == pytest.approx(direct, abs=1e-15)
        assert survival(GOMPERTZ, t) == pytest.approx(
            quad_survival(GOMPERTZ, t), abs=1e-10)

    def test_negative_time_rejected(self):
        with pytest.raises(DomainError):
            survival(GOMPERTZ, -0.5)

    @given(st.floats(min_value=0.0, max_value=60.0),
           st.floats(min_value=0.01, max_value=10.0))
    def test_strictly_decreasing(self, t, dt):
        assert survival(GOMPERTZ, t + dt) < survival(GOMPERTZ, t)

    def test_monotone_in_modal_age(self):
        lo = GompertzParams(n=60, m=70, lam=10)
        hi = GompertzParams(n=60, m=90, lam=10)
        for t in (1.0, 10.0, 30.0):
            assert survival(lo, t) < survival(hi, t)


class TestConditionalSurvival:
    def test_identity_case(self):
        assert conditional_survival(GOMPERTZ, 7.0, 7.0) == 1.0

    def test_memoryless_exponential(self):
        law = ConstantForce(delta=0.03)
        assert conditional_survival(law, 5.0, 15.0) == pytest.approx(
            math.exp(-0.3), rel=1e-13)

    def test_gompertz_ratio(self):
        got = conditional_survival(GOMPERTZ, 5.0, 10.0)
        assert got == pytest.approx(survival(GOMPERTZ, 10.0)
                                    / survival(GOMPERTZ, 5.0), rel=1e-13)
        direct = quad_survival(GOMPERTZ, 10.0) / quad_survival(GOMPERTZ, 5.0)
        assert got == pytest.approx(direct, abs=1e-8)

    def test_order_rejected(self):
        with pytest.raises(DomainError):
            conditional_survival(GOMPERTZ, 10.0, 5.0)

    @given(st.floats(min_value=0.0, max_value=40.0),
           st.floats(min_value=0.0, max_value=20.0))
    def test_multiplicativity(self, t, dt):
        s = t + dt
        lhs = survival(GOMPERTZ, s)
        rhs = survival(GOMPERTZ, t) * conditional_survival(GOMPERTZ, t, s)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestDiscounting:
    def test_constant_effective_rate(self):
        spec = DiscountSpec(beta=0.03, law=ConstantForce(delta=0.02))
        for t in (0.0, 10.0, 33.3):
            assert effective_rate(spec, t) == pytest.approx(0.05, abs=1e-15)

    def test_gompertz_effective_rate(self):
        spec = DiscountSpec(beta=0.03, law=GOMPERTZ)
        assert effective_rate(spec, 20.0) == pytest.approx(0.13, abs=1e-14)

    def test_cumulative_linear_constant(self):
        spec = DiscountSpec(beta=0.03, law=ConstantForce(delta=0.02))
        assert cumulative_discount(spec, 0.0) == 0.0
        assert cumulative_discount(spec, 10.0) == pytest.approx(0.5, abs=1e-13)

    def test_cumulative_increasing_convex_gompertz(self):
        spec = DiscountSpec(beta=0.03, law=GOMPERTZ)
        ss = np.linspace(0.0, 40.0, 21)
        vals = np.array([cumulative_discount(spec, float(s)) for s in ss])
        assert np.all(np.diff(vals) > 0)
        assert np.all(np.diff(vals, 2) > 0)

    def test_negative_time_rejected(self):
        spec = DiscountSpec(beta=0.03, law=GOMPERTZ)
        with pytest.raises(DomainError):
            effective_rate(spec, -1.0)
        with pytest.raises(DomainError):
            cumulative_discount(spec, -1.0)


class TestAnnuityPricing:
    def test_constant_force_closed_form(self):
        spec = DiscountSpec(beta=0.03, law=ConstantForce(delta=0.02))
        assert annuity_factor(spec) == pytest.approx(20.0, abs=1e-10)
        assert fair_rate(spec) == pytest.approx(0.05, abs=1e-10)

    def test_constant_force_second_point(self):
        spec = DiscountSpec(beta=0.03, law=ConstantForce(delta=0.07))
        assert annuity_factor(spec) == pytest.approx(10.0, abs=1e-9)
        assert fair_rate(spec) == pytest.approx(0.10, abs=1e-10)

    def test_gompertz_vs_simpson_oracle(self):
        from scipy.integrate import simpson
        spec = DiscountSpec(beta=0.03, law=GOMPERTZ)
        ts = np.linspace(0.0, 200.0, 400001)
        integrand = np.array([math.exp(-0.03 * t) * survival(GOMPERTZ, t)
                              for t in ts])
        oracle = simpson(integrand, x=ts)
        assert annuity_factor(spec) == pytest.approx(oracle, rel=1e-6)

    def test_rate_inverts_factor(self):
        spec = DiscountSpec(beta=0.03, law=GOMPERTZ)
        assert fair_rate(spec) * annuity_factor(spec) == pytest.approx(
            1.0, abs=1e-13)


class TestPremiumAndNpr:
    def test_identical_laws(self):
        assert npr(GOMPERTZ, GOMPERTZ, r=0.02) == pytest.approx(1.0, abs=1e-12)

    def test_premium_positive_and_ordered(self):
        p60 = premium(GompertzParams(n=60, m=60, lam=10), r=0.02)
        p80 = premium(GompertzParams(n=60, m=80, lam=10), r=0.02)
        assert 0 < p60 < p80

    def test_npr_increasing_in_subjective_modal_age(self):
        obj = GompertzParams(n=60, m=80, lam=10)
        vals = [npr(GompertzParams(n=60, m=m, lam=10), obj, r=0.02)
                for m in (60, 65, 70, 75, 80)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(0 < v <= 1 for v in vals)

    def test_mismatched_laws_rejected(self):
        obj = GompertzParams(n=60, m=80, lam=10)
        with pytest.raises(ConfigError):
            npr(GompertzParams(n=55, m=70, lam=10), obj, r=0.02)
        with pytest.raises(ConfigError):
            npr(GompertzParams(n=60, m=70, lam=12), obj, r=0.02)

    def test_npr_vs_direct_ratio(self):
        obj = GompertzParams(n=60, m=80, lam=10)
        sub = GompertzParams(n=60, m=70, lam=10)
        want = premium(sub, 0.02) / premium(obj, 0.02)
        assert npr(sub, obj, r=0.02) == pytest.approx(want, rel=1e-12)
