"""Model parameters, utility, reduced wealth-to-habit dynamics, the
annuitization payoff and the constant-weight benchmark.

The state is the wealth-to-habit ratio y = X/Z.  Controls are the
portfolio weight p, the consumption-to-habit ratio kappa and the labor
supply b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class MarketParams:
    r: float = 0.02      # risk-free rate, per year
    mu: float = 0.07     # expected risky return, per year
    sigma: float = 0.2   # volatility, per sqrt(year)

    @property
    def theta(self) -> float:
        """Market price of risk (mu - r) / sigma."""
        return (self.mu - self.r) / self.sigma


@dataclass(frozen=True)
class PreferenceParams:
    beta: float = 0.03   # subjective discount rate, per year
    gamma: float = 2.0   # relative risk aversion
    psi: float = 0.5     # leisure weight
    lbar: float = 1.0    # leisure endowment
    alpha: float = 0.9   # habit addictiveness, consumption floor fraction
    rho: float = 0.1     # habit adjustment speed, per year


@dataclass(frozen=True)
class LaborParams:
    w: float = 10.0      # wage per habit-unit of labor per year
    bbar: float = 0.8    # labor cap, must stay below lbar


@dataclass(frozen=True)
class ModelParams:
    market: MarketParams
    preferences: PreferenceParams
    labor: LaborParams
    k: float             # annuity rate, per year
    eta: float           # effective discount rate at the evaluation age


def validate(params: ModelParams) -> list[str]:
    """Return the names of all violated invariants (empty list if ok)."""
    mkt, pref, lab = params.market, params.preferences, params.labor
    violations = []
    if not mkt.r > 0:
        violations.append("risk-free rate positive")
    if not mkt.sigma > 0:
        violations.append("volatility positive")
    elif not math.isfinite(mkt.theta):
        violations.append("market price of risk finite")
    if not pref.beta > 0:
        violations.append("discount rate positive")
    if not (pref.gamma > 0 and pref.gamma != 1.0):
        violations.append("risk aversion positive and != 1")
    if not pref.psi > 0:
        violations.append("leisure weight positive")
    if not (0.0 < pref.alpha <= 1.0):
        violations.append("addictiveness in (0, 1]")
    if not pref.rho > 0:
        violations.append("habit speed positive")
    if pref.rho > 0 and not mkt.r > pref.rho * (1.0 - pref.alpha):
        violations.append("viability")
    if not lab.w > 0:
        violations.append("wage positive")
    if not (0.0 < lab.bbar < pref.lbar):
        violations.append("labor cap in (0, lbar)")
    if not params.k > mkt.r:
        violations.append("annuity rate above risk-free rate")
    if not params.eta > pref.beta:
        violations.append("effective rate above discount rate")
    return violations


def utility(kappa: float, b: float, prefs: PreferenceParams) -> float:
    """CRRA utility over the composite kappa * (lbar - b)^psi."""
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    if b < 0 or b >= prefs.lbar:
        raise DomainError("labor must satisfy 0 <= b < lbar")
    composite = kappa * (prefs.lbar - b) ** prefs.psi
    return composite ** (1.0 - prefs.gamma) / (1.0 - prefs.gamma)


def utility_dkappa(kappa: float, b: float, prefs: PreferenceParams) -> float:
    """Marginal utility of the consumption-to-habit ratio."""
    leisure = (prefs.lbar - b) ** prefs.psi
    return kappa ** (-prefs.gamma) * leisure ** (1.0 - prefs.gamma)


def utility_db(kappa: float, b: float, prefs: PreferenceParams) -> float:
    """Marginal (dis)utility of labor; negative for b < lbar."""
    g, psi, lbar = prefs.gamma, prefs.psi, prefs.lbar
    return -psi * kappa ** (1.0 - g) * (lbar - b) ** (psi * (1.0 - g) - 1.0)


def drift_diffusion_y(y: float, p: float, kappa: float, b: float,
                      params: ModelParams) -> tuple[float, float]:
    """Drift and diffusion of the wealth-to-habit ratio under (p, kappa, b)."""
    mkt, pref, lab = params.market, params.preferences, params.labor
    drift = ((mkt.r + pref.rho) * y + p * y * (mkt.mu - mkt.r)
             - kappa * (1.0 + pref.rho * y) + lab.w * b)
    diffusion = mkt.sigma * p * y
    return drift, diffusion


def obstacle_G(y: float, params: ModelParams) -> float:
    """Value of immediate annuitization at ratio y."""
    if y <= 0:
        raise DomainError("y must be positive")
    g = params.preferences.gamma
    return (params.k * y) ** (1.0 - g) / (params.eta * (1.0 - g))


def obstacle_G_derivs(y: float, params: ModelParams) -> tuple[float, float, float]:
    """(G, G', G'') at y, closed forms."""
    if y <= 0:
        raise DomainError("y must be positive")
    g = params.preferences.gamma
    k, eta = params.k, params.eta
    G = (k * y) ** (1.0 - g) / (eta * (1.0 - g))
    G1 = k ** (1.0 - g) * y ** (-g) / eta
    G2 = -g * k ** (1.0 - g) * y ** (-g - 1.0) / eta
    return G, G1, G2


def merton_weight(params: ModelParams) -> float:
    """Constant risky weight of the post-annuitization benchmark."""
    mkt = params.market
    return (mkt.mu - mkt.r) / (mkt.sigma ** 2 * params.preferences.gamma)


def merton_consumption_rate(params: ModelParams) -> float:
    """Optimal consumption-to-wealth rate of the classical CRRA problem
    with discount rate eta."""
    mkt, g = params.market, params.preferences.gamma
    theta = mkt.theta
    return (params.eta - (1.0 - g) * (mkt.r + theta ** 2 / (2.0 * g))) / g


def merton_value(y: float, params: ModelParams) -> float:
    """Closed-form CRRA value function of the no-labor, no-habit,
    no-stopping limit; the independent oracle for the solver."""
    g = params.preferences.gamma
    nu = merton_consumption_rate(params)
    if nu <= 0:
        raise DomainError("Merton consumption rate must be positive")
    return nu ** (-g) * y ** (1.0 - g) / (1.0 - g)
