"""Stationary HJB variational inequality solver on a wealth-to-habit grid.

Policy iteration (Howard) with a monotone upwind finite-difference scheme:
each sweep maximizes the Hamiltonian node-by-node from the current value
iterate, decides stop-vs-continue against the annuitization payoff, and
solves the resulting tridiagonal system implicitly.  The stop decision is
part of the policy, so at the fixed point the discrete complementarity
condition holds to linear-solver roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .errors import (DegenerateMarginalValue, DomainError, GridTooSmall,
                     NoConvergence, NonConcave)
from .model import (ModelParams, drift_diffusion_y, merton_consumption_rate,
                    merton_value, merton_weight, obstacle_G_derivs, utility)

REGION_INTERIOR = "interior-labor"
REGION_CORNER = "corner-labor"
REGION_STOPPED = "stopped"

_VP_FLOOR = 1e-12
_VPP_CEIL = -1e-12

# pseudo-transient damping: early sweeps solve (1/dt + eta)V - LV = u + V/dt,
# with dt doubling each sweep, so the undamped Howard update is recovered
# once the iterate is close to the fixed point
_DT0 = 0.25
_DT_GROWTH = 2.0
_DT_MAX = 1e12


@dataclass(frozen=True)
class Grid:
    """Discretization of the wealth-to-habit state."""

    y_min: float = 1e-3
    y_max: float = 200.0
    n: int = 2000
    spacing: str = "log"  # "log" | "uniform"

    def __post_init__(self):
        if not 0 < self.y_min < self.y_max:
            raise DomainError("require 0 < y_min < y_max")
        if self.n < 3:
            raise DomainError("need at least 3 nodes")
        if self.spacing not in ("log", "uniform"):
            raise DomainError(f"unknown spacing {self.spacing!r}")

    def nodes(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.y_min, self.y_max, self.n)
        return np.linspace(self.y_min, self.y_max, self.n)


@dataclass(frozen=True)
class SolverConfig:
    max_sweeps: int = 600
    tol: float = 1e-9             # relative sup-norm change per sweep
    obstacle_mode: str = "projection"  # "projection" | "penalty"
    penalty_coeff: float = 1e7
    obstacle_enabled: bool = True
    upwind: str = "drift-sign"
    p_max: float = 10.0           # portfolio-weight cap

    def __post_init__(self):
        if self.tol <= 0:
            raise DomainError("tolerance must be positive")
        if self.obstacle_mode not in ("projection", "penalty"):
            raise DomainError(f"unknown obstacle mode {self.obstacle_mode!r}")
        if self.obstacle_mode == "penalty" and self.penalty_coeff <= 0:
            raise DomainError("penalty coefficient must be positive")


@dataclass
class SolveResult:
    grid: Grid
    y: np.ndarray
    value: np.ndarray
    p_star: np.ndarray
    kappa_star: np.ndarray
    b_star: np.ndarray
    region: np.ndarray           # per-node labels
    y_tilde: Optional[float]
    y_star: Optional[float]
    hjb_residual: np.ndarray     # min(continuation residual, V - G) per node
    cont_residual: np.ndarray    # eta*V - u - LV with the reported controls
    value_match_residual: Optional[float]
    smooth_pasting_residual: Optional[float]
    c2_residual: Optional[float]
    sweeps: int
    nonconcave_nodes: int = 0
    degenerate_nodes: int = 0
    params: Optional[ModelParams] = None
    config: Optional[SolverConfig] = None


# ---------------------------------------------------------------------------
# Hamiltonian maximization
# ---------------------------------------------------------------------------

def _kappa_foc(b, y, vp, params):
    """Consumption FOC solved for kappa with labor fixed, floored at alpha."""
    pref = params.preferences
    denom = ((pref.lbar - b) ** pref.psi) ** (1.0 - pref.gamma)
    kappa = (vp * (1.0 + pref.rho * y) / denom) ** (-1.0 / pref.gamma)
    return np.maximum(kappa, pref.alpha)


def _labor_gain(b, y, vp, params):
    """Marginal Hamiltonian gain of labor at the kappa-optimum (envelope)."""
    pref, lab = params.preferences, params.labor
    kappa = _kappa_foc(b, y, vp, params)
    marginal_disutility = (pref.psi * kappa ** (1.0 - pref.gamma)
                           * (pref.lbar - b) ** (pref.psi * (1.0 - pref.gamma) - 1.0))
    return lab.w * vp - marginal_disutility


def _optimal_labor(y, vp, params, bisect_iters=64):
    """Vectorized labor choice on [0, bbar]: corner tests then bisection."""
    bbar = params.labor.bbar
    zeros = np.zeros_like(np.asarray(y, dtype=float))
    if bbar <= 0:
        return zeros
    g0 = _labor_gain(zeros, y, vp, params)
    gb = _labor_gain(np.full_like(zeros, bbar), y, vp, params)
    b = np.where(gb >= 0.0, bbar, 0.0)
    interior = (g0 > 0.0) & (gb < 0.0)
    if np.any(interior):
        yi, vpi = np.asarray(y)[interior], np.asarray(vp)[interior]
        lo = np.zeros(yi.shape)
        hi = np.full(yi.shape, bbar)
        for _ in range(bisect_iters):
            mid = 0.5 * (lo + hi)
            pos = _labor_gain(mid, yi, vpi, params) > 0.0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        bi = 0.5 * (lo + hi)
        b = np.asarray(b, dtype=float)
        b[interior] = bi
    return b


def _controls_vec(y, vp, vpp, params, p_max):
    """Maximizing controls (p, kappa, b) at each node given V', V''."""
    mkt = params.market
    raw = -(mkt.mu - mkt.r) / mkt.sigma ** 2 * vp / (y * vpp)
    p = np.clip(raw, 0.0, p_max)
    b = _optimal_labor(y, vp, params)
    kappa = _kappa_foc(b, y, vp, params)
    return p, kappa, b


def maximize_hamiltonian(y: float, vp: float, vpp: float, params: ModelParams,
                         p_max: float = 10.0):
    """Maximize the continuation Hamiltonian at a single state.

    Returns (p*, kappa*, b*, H).  Requires a strictly concave, strictly
    increasing local value profile.
    """
    if vpp >= 0.0:
        raise NonConcave(f"V'' = {vpp} >= 0 at y = {y}")
    if vp <= 0.0:
        raise DegenerateMarginalValue(f"V' = {vp} <= 0 at y = {y}")
    ya, vpa, vppa = (np.asarray([v], dtype=float) for v in (y, vp, vpp))
    p, kappa, b = _controls_vec(ya, vpa, vppa, params, p_max)
    p_, kappa_, b_ = float(p[0]), float(kappa[0]), float(b[0])
    drift, diff = drift_diffusion_y(y, p_, kappa_, b_, params)
    H = utility(kappa_, b_, params.preferences) + vp * drift + 0.5 * vpp * diff ** 2
    return p_, kappa_, b_, H


# ---------------------------------------------------------------------------
# Discrete operator assembly
# ---------------------------------------------------------------------------

def _is_homothetic(params):
    """True when labor income vanishes identically, so the continuation
    problem (and the annuitization payoff) scale as y**(1-gamma)."""
    return params.labor.w == 0.0 or params.labor.bbar == 0.0


def _constrain_bottom(y0, kappa0, b0, params):
    """State constraint at the lower edge: consumption there cannot exceed
    what labor and returns finance, or the reflecting row would price an
    infeasible free lunch."""
    pref, mkt, lab = params.preferences, params.market, params.labor
    budget = ((mkt.r + pref.rho) * y0 + lab.w * b0) / (1.0 + pref.rho * y0)
    return min(kappa0, max(budget, pref.alpha))


def _fd_derivatives(y, V):
    """Central first/second differences on a non-uniform grid, one-sided at
    the ends (used only to evaluate the control FOCs)."""
    n = y.size
    vp = np.empty(n)
    vpp = np.empty(n)
    hm = y[1:-1] - y[:-2]
    hp = y[2:] - y[1:-1]
    vp[1:-1] = (V[2:] - V[:-2]) / (hm + hp)
    vpp[1:-1] = 2.0 * ((V[2:] - V[1:-1]) / hp - (V[1:-1] - V[:-2]) / hm) / (hm + hp)
    vp[0] = (V[1] - V[0]) / (y[1] - y[0])
    vp[-1] = (V[-1] - V[-2]) / (y[-1] - y[-2])
    vpp[0] = vpp[1]
    vpp[-1] = vpp[-2]
    return vp, vpp


def _assemble(y, p, kappa, b, params, eta):
    """Upwind tridiagonal rows for eta*V - u - LV = 0.

    Returns (lower, diag, upper, rhs).  Off-diagonals are non-positive by
    construction (drift upwinded by sign), so the system is an M-matrix.
    For homothetic models the truncation boundaries carry power-law
    extrapolation rows, which are exact for V proportional to y**(1-gamma).
    """
    mkt, pref, lab = params.market, params.preferences, params.labor
    n = y.size
    drift = ((mkt.r + pref.rho) * y + p * y * (mkt.mu - mkt.r)
             - kappa * (1.0 + pref.rho * y) + lab.w * b)
    vol2 = (mkt.sigma * p * y) ** 2

    lower = np.zeros(n)
    diag = np.full(n, eta)
    upper = np.zeros(n)
    leisure = (pref.lbar - b) ** pref.psi
    rhs = (kappa * leisure) ** (1.0 - pref.gamma) / (1.0 - pref.gamma)

    hm = y[1:-1] - y[:-2]
    hp = y[2:] - y[1:-1]
    D = 0.5 * vol2[1:-1]
    wm = 2.0 / (hm * (hm + hp))
    wp = 2.0 / (hp * (hm + hp))
    ap = np.maximum(drift[1:-1], 0.0)
    am = np.maximum(-drift[1:-1], 0.0)
    lower[1:-1] = -(D * wm + am / hm)
    upper[1:-1] = -(D * wp + ap / hp)
    diag[1:-1] = eta + D * (wm + wp) + ap / hp + am / hm

    if _is_homothetic(params):
        gamma = pref.gamma
        diag[0] = 1.0
        upper[0] = -((y[0] / y[1]) ** (1.0 - gamma))
        rhs[0] = 0.0
        diag[-1] = 1.0
        lower[-1] = -((y[-1] / y[-2]) ** (1.0 - gamma))
        rhs[-1] = 0.0
        return lower, diag, upper, rhs

    # lower boundary: no diffusion, reflecting (outflow drift clamped)
    a0 = max(drift[0], 0.0)
    h0 = y[1] - y[0]
    diag[0] = eta + a0 / h0
    upper[0] = -a0 / h0

    # upper boundary: no diffusion, reflecting; a Dirichlet row replaces this
    # when the obstacle is active
    aN = min(drift[-1], 0.0)
    hN = y[-1] - y[-2]
    diag[-1] = eta - aN / hN
    lower[-1] = aN / hN

    return lower, diag, upper, rhs


def _solve_tridiag(lower, diag, upper, rhs):
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


# ---------------------------------------------------------------------------
# Variational-inequality solve
# ---------------------------------------------------------------------------

def solve_vi(grid: Grid, params: ModelParams, config: SolverConfig | None = None) -> SolveResult:
    """Solve the stationary variational inequality by policy iteration."""
    if config is None:
        config = SolverConfig()
    y = grid.nodes()
    n = y.size
    eta = params.eta
    pref = params.preferences

    if config.obstacle_enabled:
        Gv = np.array([obstacle_G_derivs(yi, params)[0] for yi in y])
    else:
        Gv = np.full(n, -np.inf)

    # initial guess: CRRA-shaped continuation value, lifted onto the obstacle
    try:
        V = np.array([merton_value(yi, params) for yi in y])
    except DomainError:
        V = np.array([utility(max(pref.alpha, 1e-6), 0.0, pref) for _ in y]) / eta
    if config.obstacle_enabled:
        V = np.maximum(V, Gv)

    stop = np.zeros(n, dtype=bool)
    nonconcave = 0
    degenerate = 0
    sweeps = 0
    delta = np.inf
    prev_stop = stop.copy()

    # concavity gives V'(y) >= V'(y_max), and the top of the grid lies in
    # the stopped region where V = G, so G'(y_max) bounds the marginal
    # value from below everywhere; this removes the spurious fixed point
    # where a flat value iterate drives consumption to infinity
    vp_floor = _VP_FLOOR
    if config.obstacle_enabled:
        vp_floor = max(vp_floor, 0.1 * obstacle_G_derivs(y[-1], params)[1])

    # relaxed policy update: utility -> 0 as consumption explodes, so a
    # policy sweep against an underestimated slope would otherwise run away
    # toward infinite consumption before the value update can catch up
    kappa_prev = None

    for sweeps in range(1, config.max_sweeps + 1):
        vp, vpp = _fd_derivatives(y, V)
        degenerate = int(np.sum(vp <= 0.0))
        nonconcave = int(np.sum(vpp >= 0.0))
        vp = np.maximum(vp, vp_floor)
        vpp = np.minimum(vpp, _VPP_CEIL)

        p, kappa, b = _controls_vec(y, vp, vpp, params, config.p_max)
        if kappa_prev is not None:
            kappa = np.minimum(kappa, 1.5 * kappa_prev)
        kappa_prev = kappa
        if not _is_homothetic(params):
            p[0] = 0.0  # diffusion degenerates at the habit-poor edge
            kappa[0] = _constrain_bottom(y[0], kappa[0], b[0], params)
        lower, diag, upper, rhs = _assemble(y, p, kappa, b, params, eta)
        inv_dt = 1.0 / min(_DT0 * _DT_GROWTH ** (sweeps - 1), _DT_MAX)
        diag = diag + inv_dt
        rhs = rhs + inv_dt * V

        if config.obstacle_enabled:
            if config.obstacle_mode == "projection":
                # stop wherever the payoff beats the implied continuation value
                cont = np.empty(n)
                cont[0] = (rhs[0] - upper[0] * V[1]) / diag[0]
                cont[1:-1] = (rhs[1:-1] - lower[1:-1] * V[:-2]
                              - upper[1:-1] * V[2:]) / diag[1:-1]
                cont[-1] = (rhs[-1] - lower[-1] * V[-2]) / diag[-1]
                prev_stop = stop
                stop = Gv > cont
                stop[-1] = True  # Dirichlet V = G at y_max
                lo2, di2, up2, rh2 = lower.copy(), diag.copy(), upper.copy(), rhs.copy()
                lo2[stop] = 0.0
                up2[stop] = 0.0
                di2[stop] = 1.0
                rh2[stop] = Gv[stop]
                V_new = _solve_tridiag(lo2, di2, up2, rh2)
            else:
                active = V < Gv
                di2 = diag + config.penalty_coeff * active
                rh2 = rhs + config.penalty_coeff * np.where(active, Gv, 0.0)
                V_new = _solve_tridiag(lower, di2, upper, rh2)
                prev_stop = stop
                stop = V_new <= Gv + 1e-9 * (1.0 + np.abs(Gv))
        else:
            prev_stop = stop
            V_new = _solve_tridiag(lower, diag, upper, rhs)

        delta = np.max(np.abs(V_new - V)) / (1.0 + np.max(np.abs(V_new)))
        V = V_new
        if (delta < config.tol and np.array_equal(stop, prev_stop)
                and inv_dt <= 1e-6):
            break
    else:
        raise NoConvergence(
            f"no convergence after {config.max_sweeps} sweeps "
            f"(last relative update {delta:.3e})", residual=delta)

    if config.obstacle_enabled:
        V = np.maximum(V, Gv)  # guards roundoff-level dips below the payoff
        first_stop = int(np.argmax(stop))
        if first_stop == n - 1 and not stop[:-1].any():
            raise GridTooSmall(
                "stopping region collapsed to the boundary node; raise y_max")

    # final controls and residuals from the converged value function
    vp, vpp = _fd_derivatives(y, V)
    vp = np.maximum(vp, vp_floor)
    vpp = np.minimum(vpp, _VPP_CEIL)
    p, kappa, b = _controls_vec(y, vp, vpp, params, config.p_max)
    if not _is_homothetic(params):
        p[0] = 0.0
        kappa[0] = _constrain_bottom(y[0], kappa[0], b[0], params)
    lower, diag, upper, rhs = _assemble(y, p, kappa, b, params, eta)
    cont_residual = np.empty(n)
    cont_residual[0] = diag[0] * V[0] + upper[0] * V[1] - rhs[0]
    cont_residual[1:-1] = (lower[1:-1] * V[:-2] + diag[1:-1] * V[1:-1]
                           + upper[1:-1] * V[2:] - rhs[1:-1])
    cont_residual[-1] = lower[-1] * V[-2] + diag[-1] * V[-1] - rhs[-1]
    if config.obstacle_enabled:
        hjb_residual = np.minimum(cont_residual, V - Gv)
    else:
        hjb_residual = cont_residual.copy()

    # exact stopping-branch values
    if config.obstacle_enabled:
        mw = merton_weight(params)
        kappa[stop] = params.k * y[stop]
        b[stop] = 0.0
        p[stop] = mw

    at_cap = (params.labor.bbar > 0.0) & (b >= params.labor.bbar - 1e-12)
    region = np.where(stop, REGION_STOPPED,
                      np.where(at_cap, REGION_CORNER, REGION_INTERIOR))

    result = SolveResult(
        grid=grid, y=y, value=V, p_star=p, kappa_star=kappa, b_star=b,
        region=region, y_tilde=None, y_star=None,
        hjb_residual=hjb_residual, cont_residual=cont_residual,
        value_match_residual=None, smooth_pasting_residual=None,
        c2_residual=None, sweeps=sweeps,
        nonconcave_nodes=nonconcave, degenerate_nodes=degenerate,
        params=params, config=config)

    if config.obstacle_enabled:
        y_tilde, y_star = extract_thresholds(result)
        result.y_tilde, result.y_star = y_tilde, y_star
        diag_rec = boundary_diagnostics(result, params)
        result.value_match_residual = diag_rec["value_matching"]
        result.smooth_pasting_residual = diag_rec["smooth_pasting"]
        result.c2_residual = diag_rec["super_contact"]
    return result


# ---------------------------------------------------------------------------
# Threshold extraction and free-boundary diagnostics
# ---------------------------------------------------------------------------

def extract_thresholds(result: SolveResult, allow_no_stop: bool = False):
    """(y_tilde, y_star) from region labels, y_star refined off-grid.

    The annuitization threshold is refined by extrapolating the
    continuation branch quadratically past its last node and intersecting
    it with the payoff between the bracketing nodes.
    """
    y, V = result.y, result.value
    stopped = result.region == REGION_STOPPED
    corner = result.region == REGION_CORNER

    if not stopped.any():
        if allow_no_stop:
            y_star = None
        else:
            raise GridTooSmall("no stopped node on the grid")
    else:
        i_stop = int(np.argmax(stopped))
        y_star = float(y[i_stop])
        if 3 <= i_stop:  # refine between the bracketing nodes
            params = result.params
            ys_nodes = y[i_stop - 3:i_stop]
            vs_nodes = V[i_stop - 3:i_stop]
            coeffs = np.polyfit(ys_nodes, vs_nodes, 2)

            def gap(x):
                return float(np.polyval(coeffs, x)
                             - obstacle_G_derivs(x, params)[0])

            lo, hi = float(y[i_stop - 1]), float(y[i_stop])
            glo, ghi = gap(lo), gap(hi)
            if glo > 0.0 > ghi:
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    if gap(mid) > 0.0:
                        lo = mid
                    else:
                        hi = mid
                y_star = 0.5 * (lo + hi)

    # labor-cap threshold: the interface between the capped and interior
    # regions, from whichever side of the grid the cap binds on
    if corner.any() and (~corner & ~stopped).any():
        i_first = int(np.argmax(corner))
        if i_first == 0:
            i_last = int(np.max(np.nonzero(corner)[0]))
            y_tilde = float(y[min(i_last + 1, y.size - 1)])
        else:
            y_tilde = float(y[i_first])
    elif corner.any():
        y_tilde = float(y[int(np.argmax(corner))])
    else:
        y_tilde = None
    return y_tilde, y_star


def _one_sided_spline(ys, vs, tail=12):
    m = min(tail, ys.size)
    if m < 4:
        return None
    return CubicSpline(ys[-m:], vs[-m:], extrapolate=True)


def boundary_diagnostics(result: SolveResult, params: ModelParams) -> dict:
    """Free-boundary condition residuals of the numerical solution.

    Value-matching, smooth-pasting and super-contact mismatches at the
    annuitization boundary, and one-sided C0/C1/C2 mismatches at the
    labor-constraint boundary.  Entries are None when the corresponding
    boundary does not exist.
    """
    out = {"value_matching": None, "smooth_pasting": None, "super_contact": None,
           "c2_value": None, "c2_slope": None, "c2_curvature": None}
    y, V = result.y, result.value
    stopped = result.region == REGION_STOPPED

    if stopped.any() and result.y_star is not None:
        i_stop = int(np.argmax(stopped))
        ys = result.y_star
        G, G1, G2 = obstacle_G_derivs(float(y[i_stop]), params)
        out["value_matching"] = abs(float(V[i_stop]) - G)
        cont_mask = ~stopped
        yc, vc = y[cont_mask], V[cont_mask]
        # smooth pasting: mismatch between the continuation-side derivative
        # and the payoff derivative over the nodes approaching the boundary.
        # This tends to zero with refinement iff V' is continuous at y*.
        if yc.size >= 7:
            idx = np.arange(yc.size - 6, yc.size - 1)
            vpc = (vc[idx + 1] - vc[idx - 1]) / (yc[idx + 1] - yc[idx - 1])
            gp = np.array([obstacle_G_derivs(t, params)[1] for t in yc[idx]])
            out["smooth_pasting"] = float(np.max(np.abs(vpc - gp)))
        sp = _one_sided_spline(yc, vc)
        if sp is not None:
            _, _, G2s = obstacle_G_derivs(ys, params)
            out["super_contact"] = abs(float(sp(ys, 2)) - G2s)

    interior = result.region == REGION_INTERIOR
    corner = result.region == REGION_CORNER
    if interior.any() and corner.any() and result.y_tilde is not None:
        yt = result.y_tilde
        below = ~stopped & (y < yt)
        above = ~stopped & (y >= yt)
        sp_lo = _one_sided_spline(y[below], V[below])
        ya, va = y[above], V[above]
        m = min(12, ya.size)
        sp_hi = CubicSpline(ya[:m], va[:m], extrapolate=True) if m >= 4 else None
        if sp_lo is not None and sp_hi is not None:
            out["c2_value"] = abs(float(sp_lo(yt)) - float(sp_hi(yt)))
            out["c2_slope"] = abs(float(sp_lo(yt, 1)) - float(sp_hi(yt, 1)))
            out["c2_curvature"] = abs(float(sp_lo(yt, 2)) - float(sp_hi(yt, 2)))
    return out
