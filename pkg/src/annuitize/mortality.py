"""Mortality laws, survival probabilities, effective discounting and
continuous life-annuity pricing.

Two laws are supported: an age-dependent Gompertz force of mortality
(modal age m, dispersion lambda) and a constant force, which gives
closed-form oracles for testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import ConfigError, DomainError
from .numerics import QuadratureSpec, integrate_semi_infinite


@dataclass(frozen=True)
class GompertzParams:
    """Gompertz mortality: force (1/lam) * exp((n + t - m) / lam) at time t
    for an agent currently aged ``n``."""

    n: float  # current age, years
    m: float  # modal age of death, years
    lam: float  # dispersion, years

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError("dispersion lambda must be positive")
        if self.n < 0:
            raise ConfigError("current age must be non-negative")
        if self.m <= 0:
            raise ConfigError("modal age must be positive")

    def at_age(self, age: float) -> "GompertzParams":
        """Same law rebased to a different current age."""
        return GompertzParams(n=age, m=self.m, lam=self.lam)


@dataclass(frozen=True)
class ConstantForce:
    """Constant force of mortality delta (exponential lifetime)."""

    delta: float  # per year

    def __post_init__(self):
        if self.delta <= 0:
            raise ConfigError("constant force delta must be positive")


MortalityLaw = Union[GompertzParams, ConstantForce]


@dataclass(frozen=True)
class DiscountSpec:
    """Subjective time preference combined with a mortality law."""

    beta: float  # per year
    law: MortalityLaw

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigError("subjective rate beta must be positive")


def force_of_mortality(law: MortalityLaw, t: float) -> float:
    """Instantaneous force of mortality t years from now."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if isinstance(law, ConstantForce):
        return law.delta
    return math.exp((law.n + t - law.m) / law.lam) / law.lam


def integrated_hazard(law: MortalityLaw, t: float) -> float:
    """Closed-form integral of the force of mortality over [0, t]."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if isinstance(law, ConstantForce):
        return law.delta * t
    return math.exp((law.n - law.m) / law.lam) * (math.exp(t / law.lam) - 1.0)


def survival(law: MortalityLaw, t: float) -> float:
    """Probability of surviving t more years."""
    return math.exp(-integrated_hazard(law, t))


def conditional_survival(law: MortalityLaw, t: float, s: float) -> float:
    """Probability of surviving to s given survival to t (0 <= t <= s)."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if s < t:
        raise DomainError("s must be >= t")
    return math.exp(-(integrated_hazard(law, s) - integrated_hazard(law, t)))


def effective_rate(spec: DiscountSpec, t: float) -> float:
    """Instantaneous effective discount rate beta + delta_t."""
    return spec.beta + force_of_mortality(spec.law, t)


def cumulative_discount(spec: DiscountSpec, s: float) -> float:
    """Integral of the effective rate over [0, s]."""
    if s < 0:
        raise DomainError("s must be non-negative")
    return spec.beta * s + integrated_hazard(spec.law, s)


def _pricing_spec(decay: float) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14, decay_rate=decay,
                          max_subdivisions=200)


def annuity_factor(spec: DiscountSpec) -> float:
    """Present value of a continuous life annuity of 1 per year,
    discounted at the subjective rate."""
    if isinstance(spec.law, ConstantForce):
        return 1.0 / (spec.beta + spec.law.delta)
    decay = spec.beta + force_of_mortality(spec.law, 0.0)
    return integrate_semi_infinite(
        lambda s: math.exp(-spec.beta * s) * survival(spec.law, s),
        _pricing_spec(decay))


def fair_rate(spec: DiscountSpec) -> float:
    """Actuarially fair annuity rate, the reciprocal of the annuity factor."""
    return 1.0 / annuity_factor(spec)


def premium(law: MortalityLaw, r: float) -> float:
    """Actuarial present value of a $1/year continuous annuity at market
    rate r."""
    if r <= 0:
        raise ConfigError("rate r must be positive")
    if isinstance(law, ConstantForce):
        return 1.0 / (r + law.delta)
    decay = r + force_of_mortality(law, 0.0)
    return integrate_semi_infinite(
        lambda t: math.exp(-r * t) * survival(law, t),
        _pricing_spec(decay))


def npr(subjective: GompertzParams, objective: GompertzParams, r: float) -> float:
    """Normalized premium ratio: subjective over objective annuity premium.

    Both laws must share the current age and dispersion; only the modal
    age (longevity belief) may differ.
    """
    if subjective.n != objective.n or subjective.lam != objective.lam:
        raise ConfigError("subjective and objective laws must share n and lambda")
    return premium(subjective, r) / premium(objective, r)
