"""Shared numerical kernels: semi-infinite quadrature, bracketed root
finding and finite-difference derivatives.

These are thin, contract-enforcing wrappers around scipy routines; all
callers in the package go through this surface so tolerances and failure
modes stay uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy import integrate, optimize

from .errors import BracketError, InvalidIntegrand, NumericalFailure

_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy controls for improper integrals on [0, inf).

    ``decay_rate`` is a lower bound on the eventual exponential decay of
    the integrand and fixes the truncation horizon.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    decay_rate: float = 0.02
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.decay_rate <= 0:
            raise ValueError("decay_rate must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


def integrate_semi_infinite(f: Callable[[float], float], spec: QuadratureSpec | None = None) -> float:
    """Integrate ``f`` over [0, inf) for integrands with exponential tails.

    The integral is truncated at T with exp(-decay_rate * T) < abs_tol / 10
    and then evaluated by adaptive quadrature on [0, T].
    """
    if spec is None:
        spec = QuadratureSpec()
    horizon = math.log(10.0 / spec.abs_tol) / spec.decay_rate

    def checked(t: float) -> float:
        v = f(t)
        if not math.isfinite(v):
            raise InvalidIntegrand(f"integrand returned {v!r} at t={t!r}")
        return v

    value, _err, info = integrate.quad(
        checked, 0.0, horizon,
        epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=True,
    )[:3]
    if isinstance(info, dict) and info.get("last", 0) >= spec.max_subdivisions:
        raise NumericalFailure(
            f"quadrature did not converge within {spec.max_subdivisions} subdivisions")
    return value


def find_root_bracketed(g: Callable[[float], float], lo: float, hi: float,
                        tol: float = 1e-12, max_iter: int = 200) -> float:
    """Root of ``g`` on [lo, hi] via Brent's method.

    Requires a sign change on the bracket; returns x with |g(x)| below
    tolerance or bracket width below tolerance.
    """
    if not lo < hi:
        raise BracketError(f"invalid bracket [{lo}, {hi}]")
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0.0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: g(lo)={glo}, g(hi)={ghi}")
    try:
        root, res = optimize.brentq(g, lo, hi, xtol=tol, rtol=4 * _EPS,
                                    maxiter=max_iter, full_output=True)
    except RuntimeError as exc:  # scipy reports exhausted iterations this way
        raise NumericalFailure(str(exc)) from exc
    if not res.converged:
        raise NumericalFailure("root finder hit the iteration limit")
    return root


def derivative_fd(f: Callable[[float], float], x: float, order: int = 1,
                  h: float | None = None) -> float:
    """Central-difference estimate of f'(x) or f''(x), O(h^2) accurate."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if h is None:
        h = _EPS ** (1.0 / 3.0) * max(1.0, abs(x))
    if h <= 0:
        raise ValueError("h must be positive")
    if order == 1:
        val = (f(x + h) - f(x - h)) / (2.0 * h)
    else:
        val = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    if not math.isfinite(val):
        raise InvalidIntegrand(f"non-finite difference stencil at x={x!r}")
    return val
