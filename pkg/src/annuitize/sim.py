"""Monte Carlo validation of solved policies.

Euler-Maruyama simulation of the wealth-to-habit ratio with the habit
level carried alongside, first-hitting stopping at the annuitization
threshold, and discounted realized-utility estimation.  Noise comes from
a counter-based Philox stream keyed by the seed, drawn step-by-step in a
fixed order, so results do not depend on execution schedule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError
from .model import merton_weight, obstacle_G_derivs
from .mortality import DiscountSpec, cumulative_discount
from .policy import PolicyTable, continuation_controls

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 20_000
    dt: float = 1.0 / 250.0       # years
    horizon: float = 60.0         # years, hard cap
    seed: int = 12345
    y0: float = 1.0
    z0: float = 1.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.n_paths < 1:
            raise ConfigError("need at least one path")
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")
        if self.y0 <= 0 or self.z0 <= 0:
            raise ConfigError("initial ratio and habit must be positive")


@dataclass
class PathStats:
    mean_utility: float
    ci_half_width: float
    tau_quantiles: dict
    frac_never_stopped: float
    frac_insolvent: float
    mean_wealth_at_stop: Optional[float]
    n_paths: int
    seed: int


def _run_paths(policy: PolicyTable, mortality: DiscountSpec, config: SimConfig,
               trace_writer=None, terminal_value=None):
    """Simulate all paths; returns per-path (utility, tau, stopped, insolvent,
    wealth_at_stop)."""
    params = policy.params
    pref = params.preferences
    n = config.n_paths
    dt = config.dt
    sqrt_dt = math.sqrt(dt)
    n_steps = int(math.ceil(config.horizon / dt))
    y_star = policy.y_star

    rng = np.random.Generator(np.random.Philox(key=config.seed))

    idx = np.arange(n)            # ids of still-running paths
    y = np.full(n, config.y0)
    z = np.full(n, config.z0)
    util = np.zeros(n)
    tau = np.full(n, np.nan)
    wealth_at_stop = np.full(n, np.nan)
    insolvent = np.zeros(n, dtype=bool)

    gamma = pref.gamma
    sigma = params.market.sigma
    mu_ex = params.market.mu - params.market.r
    r_rho = params.market.r + pref.rho
    w = params.labor.w
    one_mg = 1.0 - gamma
    g_coeff = params.k ** one_mg / (params.eta * one_mg)
    yc, kc, bc, pc = continuation_controls(policy)

    for j in range(n_steps + 1):
        t = j * dt
        disc = math.exp(-cumulative_discount(mortality, t))
        if idx.size == 0 or disc < 1e-300:
            break

        # first-hitting stop check before controls are applied this step
        if y_star is not None:
            hit = y >= y_star
            if hit.any():
                ids = idx[hit]
                util[ids] += disc * g_coeff * y[hit] ** one_mg
                tau[ids] = t
                wealth_at_stop[ids] = y[hit] * z[hit]
                idx, y, z = idx[~hit], y[~hit], z[~hit]
                if idx.size == 0:
                    break

        # full-width draw each step keeps the stream schedule-independent
        xi = rng.standard_normal(n)[idx]
        if j == n_steps:
            break

        # controls by linear interpolation on the continuation branch with
        # one shared index search (all active paths sit below the boundary)
        jc = np.clip(np.searchsorted(yc, y), 1, yc.size - 1)
        frac = np.clip((y - yc[jc - 1]) / (yc[jc] - yc[jc - 1]), 0.0, 1.0)
        kappa = kc[jc - 1] + frac * (kc[jc] - kc[jc - 1])
        b = bc[jc - 1] + frac * (bc[jc] - bc[jc - 1])
        p = pc[jc - 1] + frac * (pc[jc] - pc[jc - 1])
        leisure = (pref.lbar - b) ** pref.psi
        u = (kappa * leisure) ** one_mg / one_mg

        drift = r_rho * y + p * y * mu_ex - kappa * (1.0 + pref.rho * y) + w * b
        vol = sigma * p * y

        if trace_writer is not None:
            _write_trace(trace_writer, idx, t, y, z, kappa, b, p)

        util[idx] += disc * u * dt
        y = y + drift * dt + vol * sqrt_dt * xi
        z = z * (1.0 + pref.rho * (kappa - 1.0) * dt)

        busted = y <= 0.0
        if busted.any():
            insolvent[idx[busted]] = True
            idx, y, z = idx[~busted], y[~busted], z[~busted]

    # paths alive at the horizon cap receive a discounted continuation
    # credit when the caller supplies one; plain truncation biases the
    # mean toward zero because the omitted flow utility is negative
    if idx.size and terminal_value is not None:
        util[idx] += disc * np.asarray(terminal_value(y), dtype=float)

    stopped = ~np.isnan(tau)
    return util, tau, stopped, insolvent, wealth_at_stop


def _write_trace(writer, idx, t, y, z, kappa, b, p):
    for i in range(y.size):
        writer.writerow([int(idx[i]), f"{t:.6f}", repr(float(y[i])),
                         repr(float(z[i])), repr(float(kappa[i])),
                         repr(float(b[i])), repr(float(p[i])), 0])


def simulate(policy: PolicyTable, mortality: DiscountSpec, config: SimConfig,
             trace_path=None, terminal_value=None) -> PathStats:
    """Simulate the policy and summarize stopping times and realized value.

    ``terminal_value`` (optional callable y -> utils) values paths still
    running at the horizon cap; without it their post-horizon utility is
    dropped, which biases the mean upward since flow utility is negative.
    """
    writer = None
    fh = None
    try:
        if trace_path is not None:
            fh = open(trace_path, "w", encoding="utf-8", newline="")
            writer = csv.writer(fh)
            writer.writerow(["path", "t", "y", "Z", "kappa", "b", "p", "stopped"])
        util, tau, stopped, insolvent, wstop = _run_paths(
            policy, mortality, config, trace_writer=writer,
            terminal_value=terminal_value)
    finally:
        if fh is not None:
            fh.close()

    mean = float(np.mean(util))
    if config.n_paths > 1:
        half = _Z95 * float(np.std(util, ddof=1)) / math.sqrt(config.n_paths)
    else:
        half = 0.0
    qs = {}
    if stopped.any():
        finite_tau = tau[stopped]
        for q in (0.1, 0.25, 0.5, 0.75, 0.9):
            qs[q] = float(np.quantile(finite_tau, q))
    return PathStats(
        mean_utility=mean, ci_half_width=half, tau_quantiles=qs,
        frac_never_stopped=float(np.mean(~stopped)),
        frac_insolvent=float(np.mean(insolvent)),
        mean_wealth_at_stop=float(np.mean(wstop[stopped])) if stopped.any() else None,
        n_paths=config.n_paths, seed=config.seed)


def estimate_objective(policy: PolicyTable, mortality: DiscountSpec,
                       config: SimConfig, terminal_value=None):
    """Sample mean of the discounted objective with a 95% normal CI."""
    stats = simulate(policy, mortality, config, terminal_value=terminal_value)
    return stats.mean_utility, (stats.mean_utility - stats.ci_half_width,
                                stats.mean_utility + stats.ci_half_width)


def compare(policy_a: PolicyTable, policy_b: PolicyTable,
            mortality: DiscountSpec, config: SimConfig) -> dict:
    """Paired-path comparison under common random numbers."""
    pa, pb = policy_a.params, policy_b.params
    if pa.market != pb.market or pa.preferences != pb.preferences:
        raise ConfigError("policies must share market and preference parameters")
    util_a = _run_paths(policy_a, mortality, config)[0]
    util_b = _run_paths(policy_b, mortality, config)[0]
    diff = util_a - util_b
    mean = float(np.mean(diff))
    if config.n_paths > 1:
        half = _Z95 * float(np.std(diff, ddof=1)) / math.sqrt(config.n_paths)
    else:
        half = 0.0
    return {"mean_diff": mean, "ci_half_width": half,
            "mean_a": float(np.mean(util_a)), "mean_b": float(np.mean(util_b)),
            "n_paths": config.n_paths, "seed": config.seed}
