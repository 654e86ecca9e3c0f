"""Annuitization timing under habit formation with endogenous labor.

Numerical toolkit for the optimal-stopping problem of an agent who
works, consumes relative to a habit level, invests in a risky asset and
irreversibly converts liquid wealth into a life annuity.  The package
prices Gompertz annuities, solves the one-dimensional variational
inequality for the wealth-to-habit ratio, extracts the full-leisure and
annuitization boundaries, tabulates the feedback policy and validates
it by Monte Carlo.
"""

from .hjb import Grid, SolveResult, SolverConfig, solve_vi
from .model import (LaborParams, MarketParams, ModelParams,
                    PreferenceParams)
from .mortality import (ConstantForce, DiscountSpec, GompertzParams,
                        annuity_factor, fair_rate, npr, survival)
from .policy import PolicyTable, from_solve, merton_benchmark
from .sim import PathStats, SimConfig, simulate

__version__ = "0.1.0"

__all__ = [
    "Grid", "SolveResult", "SolverConfig", "solve_vi",
    "LaborParams", "MarketParams", "ModelParams", "PreferenceParams",
    "ConstantForce", "DiscountSpec", "GompertzParams",
    "annuity_factor", "fair_rate", "npr", "survival",
    "PolicyTable", "from_solve", "merton_benchmark",
    "PathStats", "SimConfig", "simulate",
    "__version__",
]
