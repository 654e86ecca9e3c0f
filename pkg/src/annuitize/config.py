"""Flat dotted-key run configuration with documented defaults.

The file format is `section.key = value`, one per line, `#` comments.
Unknown keys are rejected.  Defaults reproduce the baseline calibration:
a 60-year-old agent, Gompertz mortality (m=80, lambda=10), r=0.02,
mu=0.07, sigma=0.2, beta=0.03, gamma=2, psi=0.5, lbar=1, w=10, bbar=0.8,
habit speed 0.1 and addictiveness 0.9.
"""

from __future__ import annotations

from .errors import ConfigError
from .hjb import Grid, SolverConfig
from .model import LaborParams, MarketParams, ModelParams, PreferenceParams
from .mortality import (ConstantForce, DiscountSpec, GompertzParams,
                        effective_rate, fair_rate)
from .sim import SimConfig

DEFAULTS = {
    "market.r": 0.02,
    "market.mu": 0.07,
    "market.sigma": 0.2,
    "preferences.beta": 0.03,
    "preferences.gamma": 2.0,
    "preferences.psi": 0.5,
    "preferences.lbar": 1.0,
    "preferences.alpha": 0.9,
    "preferences.rho": 0.1,
    "labor.w": 10.0,
    "labor.bbar": 0.8,
    "annuity.k": "",            # empty -> fair rate at the evaluation age
    "mortality.model": "gompertz",  # gompertz | constant
    "mortality.n": 60.0,
    "mortality.m": 80.0,
    "mortality.lam": 10.0,
    "mortality.delta": 0.02,
    "run.age": 60.0,
    "run.ages": "60",
    "grid.y_min": 1e-3,
    "grid.y_max": 200.0,
    "grid.n": 2000,
    "grid.spacing": "log",
    "solver.max_sweeps": 600,
    "solver.tol": 1e-9,
    "solver.mode": "projection",
    "solver.penalty": 1e7,
    "solver.obstacle": True,
    "solver.p_max": 10.0,
    "sim.paths": 20000,
    "sim.dt": 0.004,
    "sim.horizon": 60.0,
    "sim.seed": 12345,
    "sim.y0": 1.0,
    "sim.z0": 1.0,
    "npr.modal_ages": "60,65,70,75,80",
    "npr.objective_m": 80.0,
    "npr.r": 0.02,
}


def _coerce(key: str, raw: str):
    default = DEFAULTS[key]
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, int) and not isinstance(default, bool):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from exc
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from exc
    return raw


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Parse a config file on top of the defaults; unknown keys fail."""
    cfg = dict(DEFAULTS)
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for lineno, line in enumerate(lines, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            cfg[key] = _coerce(key, raw)
    if overrides:
        for key, value in overrides.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = value
    return cfg


def float_list(raw: str, key: str) -> list[float]:
    try:
        values = [float(tok) for tok in str(raw).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated numbers") from exc
    if not values:
        raise ConfigError(f"{key}: list must be non-empty")
    return values


def build_mortality_law(cfg: dict, age: float | None = None):
    if cfg["mortality.model"] == "constant":
        return ConstantForce(delta=cfg["mortality.delta"])
    if cfg["mortality.model"] != "gompertz":
        raise ConfigError(f"unknown mortality model {cfg['mortality.model']!r}")
    n = cfg["mortality.n"] if age is None else age
    return GompertzParams(n=n, m=cfg["mortality.m"], lam=cfg["mortality.lam"])


def build_discount(cfg: dict, age: float | None = None) -> DiscountSpec:
    return DiscountSpec(beta=cfg["preferences.beta"],
                        law=build_mortality_law(cfg, age))


def build_sim_discount(cfg: dict, age: float | None = None) -> DiscountSpec:
    """Discounting for path simulation: hazard frozen at the evaluation age.

    The stationary solver discounts at the constant effective rate
    eta = beta + force-of-mortality(age); validating its value function by
    simulation requires the same constant rate along each path.
    """
    spec = build_discount(cfg, age)
    beta = cfg["preferences.beta"]
    return DiscountSpec(beta=beta,
                        law=ConstantForce(delta=effective_rate(spec, 0.0) - beta))


def build_model_params(cfg: dict, age: float | None = None) -> ModelParams:
    """Assemble model parameters for one evaluation age, resolving the
    annuity rate to the fair rate when it is not pinned in the config."""
    if age is None:
        age = cfg["run.age"]
    spec = build_discount(cfg, age)
    eta = effective_rate(spec, 0.0)
    k_raw = cfg["annuity.k"]
    k = float(k_raw) if str(k_raw).strip() else fair_rate(spec)
    return ModelParams(
        market=MarketParams(r=cfg["market.r"], mu=cfg["market.mu"],
                            sigma=cfg["market.sigma"]),
        preferences=PreferenceParams(beta=cfg["preferences.beta"],
                                     gamma=cfg["preferences.gamma"],
                                     psi=cfg["preferences.psi"],
                                     lbar=cfg["preferences.lbar"],
                                     alpha=cfg["preferences.alpha"],
                                     rho=cfg["preferences.rho"]),
        labor=LaborParams(w=cfg["labor.w"], bbar=cfg["labor.bbar"]),
        k=k, eta=eta)


def build_grid(cfg: dict) -> Grid:
    return Grid(y_min=cfg["grid.y_min"], y_max=cfg["grid.y_max"],
                n=cfg["grid.n"], spacing=cfg["grid.spacing"])


def build_solver_config(cfg: dict) -> SolverConfig:
    return SolverConfig(max_sweeps=cfg["solver.max_sweeps"],
                        tol=cfg["solver.tol"],
                        obstacle_mode=cfg["solver.mode"],
                        penalty_coeff=cfg["solver.penalty"],
                        obstacle_enabled=cfg["solver.obstacle"],
                        p_max=cfg["solver.p_max"])


def build_sim_config(cfg: dict, seed: int | None = None) -> SimConfig:
    return SimConfig(n_paths=cfg["sim.paths"], dt=cfg["sim.dt"],
                     horizon=cfg["sim.horizon"],
                     seed=cfg["sim.seed"] if seed is None else seed,
                     y0=cfg["sim.y0"], z0=cfg["sim.z0"])
