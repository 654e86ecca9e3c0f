"""Figure rendering for report outputs.

Every public function writes a PNG next to the delimited data file and
returns the path written.  Rendering uses the Agg backend so it works
headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def policy_figure(table, path):
    """Three-panel view of a policy table: consumption-to-habit, labor
    supply and the portfolio weight, with the free boundaries marked."""
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.4), sharex=True)
    y = table.y
    panels = [(table.kappa, r"consumption ratio $\kappa^*$"),
              (table.b, r"labor supply $b^*$"),
              (table.p, r"portfolio weight $p^*$")]
    for ax, (vals, label) in zip(axes, panels):
        ax.plot(y, vals, lw=1.2)
        if table.y_tilde is not None:
            ax.axvline(table.y_tilde, color="gray", ls=":", lw=0.8)
        if table.y_star is not None:
            ax.axvline(table.y_star, color="firebrick", ls="--", lw=0.8)
        ax.set_xscale("log")
        ax.set_xlabel("wealth-to-habit ratio y")
        ax.set_title(label, fontsize=10)
    return _finish(fig, path)


def value_figure(result, path):
    """Value function against the annuitization payoff."""
    from .model import obstacle_G

    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(result.y, result.value, lw=1.2, label="value")
    payoff = [obstacle_G(float(yi), result.params) for yi in result.y]
    ax.plot(result.y, payoff, lw=1.0, ls="--", label="annuitization payoff")
    if result.y_star is not None:
        ax.axvline(result.y_star, color="firebrick", ls="--", lw=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("wealth-to-habit ratio y")
    ax.legend(fontsize=9)
    return _finish(fig, path)


def npr_figure(modal_ages, ratios, path):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(modal_ages, ratios, "o-", lw=1.2)
    ax.axhline(1.0, color="gray", lw=0.8, ls=":")
    ax.set_xlabel("subjective modal age of death")
    ax.set_ylabel("normalized premium ratio")
    return _finish(fig, path)


def survival_figure(entries, path):
    """Survival curve family; entries are (label, t, S(t)) triples."""
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for label, t, s in entries:
        ax.plot(t, s, lw=1.2, label=label)
    ax.set_xlabel("years ahead")
    ax.set_ylabel("survival probability")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def surface_figure(entries, path):
    """Free boundaries as a function of evaluation age; entries are
    (age, y_tilde, y_star) triples."""
    ages = [e[0] for e in entries]
    yt = [e[1] if e[1] is not None else np.nan for e in entries]
    ys = [e[2] if e[2] is not None else np.nan for e in entries]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(ages, yt, "s-", lw=1.2, label=r"full-leisure boundary $\tilde y$")
    ax.plot(ages, ys, "o-", lw=1.2, label=r"annuitization boundary $y^*$")
    ax.set_xlabel("age")
    ax.set_ylabel("wealth-to-habit ratio")
    ax.legend(fontsize=9)
    return _finish(fig, path)


def simulation_figure(stats, path):
    """Stopping-time quantiles from a Monte Carlo run."""
    qs = sorted(stats.tau_quantiles.items())
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot([q for q, _ in qs], [v for _, v in qs], "o-", lw=1.2)
    ax.set_xlabel("quantile")
    ax.set_ylabel("years until annuitization")
    return _finish(fig, path)
