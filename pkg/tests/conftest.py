"""Shared fixtures: expensive solves are computed once per session."""

import numpy as np
import pytest

from annuitize.config import (DEFAULTS, build_grid, build_model_params,
                              build_sim_config, build_sim_discount,
                              build_solver_config)
from annuitize.hjb import Grid, SolverConfig, solve_vi
from annuitize.model import (LaborParams, MarketParams, ModelParams,
                             PreferenceParams)
from annuitize.mortality import DiscountSpec, GompertzParams, effective_rate


@pytest.fixture(scope="session")
def default_cfg():
    return dict(DEFAULTS)


@pytest.fixture(scope="session")
def default_params(default_cfg):
    return build_model_params(default_cfg)


@pytest.fixture(scope="session")
def default_solve(default_cfg, default_params):
    return solve_vi(build_grid(default_cfg), default_params,
                    build_solver_config(default_cfg))


@pytest.fixture(scope="session")
def sim_discount(default_cfg):
    return build_sim_discount(default_cfg)


@pytest.fixture(scope="session")
def sim_cfg(default_cfg):
    return build_sim_config(default_cfg)


def merton_limit_params():
    """No labor, negligible habit speed and floor: the continuation problem
    collapses to the classical constant-weight consumption problem."""
    spec = DiscountSpec(beta=0.03, law=GompertzParams(n=60, m=80, lam=10))
    return ModelParams(
        market=MarketParams(r=0.02, mu=0.07, sigma=0.2),
        preferences=PreferenceParams(beta=0.03, gamma=2.0, psi=0.5,
                                     lbar=1.0, alpha=1e-12, rho=1e-6),
        labor=LaborParams(w=0.0, bbar=0.0),
        k=0.05, eta=effective_rate(spec, 0.0))


@pytest.fixture(scope="session")
def merton_solve():
    params = merton_limit_params()
    grid = Grid(y_min=1e-3, y_max=200.0, n=2000, spacing="log")
    cfg = SolverConfig(obstacle_enabled=False)
    return solve_vi(grid, params, cfg), params
