"""Piecewise optimal-policy tables: evaluation, cross-checks and export.

A table stores the solved controls on the grid together with the two
thresholds.  Interpolation is linear and never crosses a threshold; the
stopping branch is evaluated exactly from its closed form.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, IoError
from .hjb import REGION_CORNER, REGION_INTERIOR, REGION_STOPPED, SolveResult
from .model import (LaborParams, MarketParams, ModelParams, PreferenceParams,
                    merton_weight)

CSV_HEADER = "y,region,kappa_star,b_star,p_star,pi_scaled"


@dataclass
class PolicyTable:
    y: np.ndarray
    kappa: np.ndarray
    b: np.ndarray
    p: np.ndarray
    region: np.ndarray
    y_tilde: Optional[float]
    y_star: Optional[float]
    params: ModelParams
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        order = np.argsort(self.y)
        if not np.array_equal(order, np.arange(self.y.size)):
            raise DomainError("policy nodes must be sorted in y")


def from_solve(result: SolveResult, age: Optional[float] = None) -> PolicyTable:
    """Build a policy table from a solver result, with exact stopping-branch
    values on stopped nodes."""
    params = result.params
    kappa = result.kappa_star.copy()
    b = result.b_star.copy()
    p = result.p_star.copy()
    stopped = result.region == REGION_STOPPED
    kappa[stopped] = params.k * result.y[stopped]
    b[stopped] = 0.0
    p[stopped] = merton_weight(params)
    meta = _params_meta(params)
    if age is not None:
        meta["age"] = age
    return PolicyTable(y=result.y.copy(), kappa=kappa, b=b, p=p,
                       region=result.region.copy(),
                       y_tilde=result.y_tilde, y_star=result.y_star,
                       params=params, meta=meta)


def merton_benchmark(params: ModelParams, y_nodes: np.ndarray,
                     y_star: Optional[float]) -> PolicyTable:
    """Constant-Merton-weight, no-labor benchmark: the stopping-branch
    controls applied throughout the continuation region.  Consumption is
    the proportional rule k*y without the subsistence floor — the floor
    cannot be financed without labor at small y and would force the
    benchmark into bankruptcy instead of a comparable objective."""
    y = np.asarray(y_nodes, dtype=float)
    kappa = params.k * y
    b = np.zeros_like(y)
    p = np.full_like(y, merton_weight(params))
    if y_star is None:
        region = np.full(y.shape, REGION_INTERIOR, dtype=object)
    else:
        region = np.where(y >= y_star, REGION_STOPPED, REGION_INTERIOR)
    meta = _params_meta(params)
    meta["benchmark"] = "constant-merton-no-labor"
    return PolicyTable(y=y, kappa=kappa, b=b, p=p, region=region,
                       y_tilde=None, y_star=y_star, params=params, meta=meta)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _segment_interp(yq, ys, vals):
    if ys.size == 0:
        raise DomainError("empty policy segment")
    return np.interp(yq, ys, vals)


def evaluate_many(table: PolicyTable, yq: np.ndarray):
    """Vectorized (kappa, b, p) lookups; region-aware, no cross-threshold
    interpolation, exact stopping branch."""
    yq = np.asarray(yq, dtype=float)
    kappa = np.empty_like(yq)
    b = np.empty_like(yq)
    p = np.empty_like(yq)

    stopped = np.zeros(yq.shape, dtype=bool)
    node_cont = table.region != REGION_STOPPED
    if table.y_star is not None:
        stopped = yq >= table.y_star
    if not node_cont.any():  # fully stopped table: only the exact branch
        stopped = np.ones(yq.shape, dtype=bool)
    kappa[stopped] = table.params.k * yq[stopped]
    b[stopped] = 0.0
    p[stopped] = merton_weight(table.params)

    # continuation policies are continuous across the labor-cap interface,
    # so one interpolation segment suffices; only the stopping boundary
    # carries a policy jump and is kept out of the segment
    cont = ~stopped
    if cont.any():
        ys = table.y[node_cont]
        kappa[cont] = _segment_interp(yq[cont], ys, table.kappa[node_cont])
        b[cont] = _segment_interp(yq[cont], ys, table.b[node_cont])
        p[cont] = _segment_interp(yq[cont], ys, table.p[node_cont])
    return kappa, b, p


def continuation_controls(table: PolicyTable):
    """Continuation-branch node arrays (y, kappa, b, p) for fast stepping.

    Callers that evaluate the policy many times on states strictly below
    the stopping boundary can interpolate these arrays directly with a
    single shared index search instead of going through evaluate_many.
    """
    node_cont = table.region != REGION_STOPPED
    if not node_cont.any():
        node_cont = np.ones(table.y.shape, dtype=bool)
    return (table.y[node_cont], table.kappa[node_cont],
            table.b[node_cont], table.p[node_cont])


def evaluate(table: PolicyTable, y: float):
    """Scalar policy lookup (kappa*, b*, p*) at ratio y."""
    if y <= 0:
        raise DomainError("y must be positive")
    if y < table.y[0] and (table.y_star is None or y < table.y_star):
        warnings.warn(f"y={y} below the solved grid; clamped extrapolation",
                      RuntimeWarning, stacklevel=2)
    kappa, b, p = evaluate_many(table, np.array([y]))
    return float(kappa[0]), float(b[0]), float(p[0])


# ---------------------------------------------------------------------------
# Cross-checks against the closed forms
# ---------------------------------------------------------------------------

def closed_form_crosschecks(table: PolicyTable, params: ModelParams) -> dict:
    """Deviations between the solved policy and the paper-form expressions.

    Reported, never reconciled: the interior-labor closed form is a
    diagnostic only (the FOC-based solver value is authoritative).
    """
    pref, lab = params.preferences, params.labor
    out = {"interior_labor_max_rel_dev": None,
           "withdrawal_rate_max_dev": None,
           "working_annuity_rate": 0.0}

    interior = table.region == REGION_INTERIOR
    if table.y_tilde is not None and interior.any():
        ys = table.y[interior]
        slope = ((1.0 - pref.alpha) / (lab.w * pref.alpha)
                 * (params.k ** (1.0 - pref.gamma) / params.eta) ** (-1.0 / pref.gamma))
        b_cf = slope * ys
        mask = b_cf > 1e-9
        if mask.any():
            dev = np.abs(table.b[interior][mask] - b_cf[mask]) / b_cf[mask]
            out["interior_labor_max_rel_dev"] = float(np.max(dev))

    stopped = table.region == REGION_STOPPED
    if stopped.any():
        ys = table.y[stopped]
        out["withdrawal_rate_max_dev"] = float(
            np.max(np.abs(table.kappa[stopped] / ys - params.k)))
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _params_meta(params: ModelParams) -> dict:
    mkt, pref, lab = params.market, params.preferences, params.labor
    return {
        "market.r": mkt.r, "market.mu": mkt.mu, "market.sigma": mkt.sigma,
        "preferences.beta": pref.beta, "preferences.gamma": pref.gamma,
        "preferences.psi": pref.psi, "preferences.lbar": pref.lbar,
        "preferences.alpha": pref.alpha, "preferences.rho": pref.rho,
        "labor.w": lab.w, "labor.bbar": lab.bbar,
        "annuity.k": params.k, "eta": params.eta,
    }


def _params_from_meta(meta: dict) -> ModelParams:
    return ModelParams(
        market=MarketParams(r=float(meta["market.r"]),
                            mu=float(meta["market.mu"]),
                            sigma=float(meta["market.sigma"])),
        preferences=PreferenceParams(beta=float(meta["preferences.beta"]),
                                     gamma=float(meta["preferences.gamma"]),
                                     psi=float(meta["preferences.psi"]),
                                     lbar=float(meta["preferences.lbar"]),
                                     alpha=float(meta["preferences.alpha"]),
                                     rho=float(meta["preferences.rho"])),
        labor=LaborParams(w=float(meta["labor.w"]),
                          bbar=float(meta["labor.bbar"])),
        k=float(meta["annuity.k"]), eta=float(meta["eta"]))


def export(table: PolicyTable, path, fmt: str = "csv") -> None:
    """Write the table to disk; bit-stable across runs for equal inputs."""
    if fmt not in ("csv", "json"):
        raise DomainError(f"unknown export format {fmt!r}")
    meta = dict(table.meta)
    meta["y_tilde"] = "" if table.y_tilde is None else repr(float(table.y_tilde))
    meta["y_star"] = "" if table.y_star is None else repr(float(table.y_star))
    try:
        if fmt == "csv":
            lines = [f"# {k}={meta[k]}" for k in sorted(meta)]
            lines.append(CSV_HEADER)
            for i in range(table.y.size):
                yi = float(table.y[i])
                lines.append(
                    f"{yi!r},{table.region[i]},{float(table.kappa[i])!r},"
                    f"{float(table.b[i])!r},{float(table.p[i])!r},"
                    f"{float(table.p[i]) * yi!r}")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(lines) + "\n")
        else:
            doc = {
                "meta": {k: str(v) for k, v in sorted(meta.items())},
                "columns": {
                    "y": [repr(float(v)) for v in table.y],
                    "region": list(table.region),
                    "kappa_star": [repr(float(v)) for v in table.kappa],
                    "b_star": [repr(float(v)) for v in table.b],
                    "p_star": [repr(float(v)) for v in table.p],
                    "pi_scaled": [repr(float(p) * float(y))
                                  for p, y in zip(table.p, table.y)],
                },
            }
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True)
                fh.write("\n")
    except OSError as exc:
        raise IoError(f"failed to write {path}: {exc}") from exc


def load(path) -> PolicyTable:
    """Read a table previously written by :func:`export` (either format)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"failed to read {path}: {exc}") from exc

    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        meta = dict(doc["meta"])
        cols = doc["columns"]
        y = np.array([float(v) for v in cols["y"]])
        kappa = np.array([float(v) for v in cols["kappa_star"]])
        b = np.array([float(v) for v in cols["b_star"]])
        p = np.array([float(v) for v in cols["p_star"]])
        region = np.array(cols["region"], dtype=object)
    else:
        meta = {}
        rows = []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val
            elif line != CSV_HEADER:
                rows.append(line.split(","))
        y = np.array([float(r[0]) for r in rows])
        region = np.array([r[1] for r in rows], dtype=object)
        kappa = np.array([float(r[2]) for r in rows])
        b = np.array([float(r[3]) for r in rows])
        p = np.array([float(r[4]) for r in rows])

    y_tilde = float(meta["y_tilde"]) if meta.get("y_tilde") else None
    y_star = float(meta["y_star"]) if meta.get("y_star") else None
    params = _params_from_meta(meta)
    extra = {k: v for k, v in meta.items() if k not in ("y_tilde", "y_star")}
    return PolicyTable(y=y, kappa=kappa, b=b, p=p, region=region,
                       y_tilde=y_tilde, y_star=y_star, params=params,
                       meta=extra)
