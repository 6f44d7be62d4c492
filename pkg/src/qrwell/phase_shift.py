"""Boundary phase shift of the half-line quasi-relativistic wave.

For wavenumber ``mu > 0`` the phase shift increases from 0 (``mu -> 0``) to
``pi/8`` (``mu -> inf``). Three independent evaluation routes are provided:

* :func:`theta` integrates a regular integrand over ``(0, 1)``;
* :func:`theta_pv` evaluates the principal-value integral over ``(0, inf)``;
* :func:`theta_ode` integrates the closed-form derivative from a small anchor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError
from .quadrature import QuadratureConfig, integrate, integrate_pv

__all__ = [
    "PhaseShiftEval",
    "theta",
    "theta_value",
    "theta_pv",
    "theta_ode",
    "theta_derivative",
    "theta_asymptotic_small",
    "theta_asymptotic_large",
    "theta_bounds",
]

PI8 = math.pi / 8

# tighter than the package default: theta feeds root finding and differences
_THETA_CFG = QuadratureConfig(abs_tol=1e-14, rel_tol=1e-13, max_subdivisions=500)
_ODE_ANCHOR = 1e-3
_SERIES_BELOW = 1e-4


@dataclass(frozen=True)
class PhaseShiftEval:
    mu: float
    theta: float
    dtheta_dmu: float
    method: str = "regularized_integral"
    err_est: float = 0.0


def _regular_integrand(s, mu):
    # integrand of (1/pi) int_0^1 log(ratio)/(1 - s^2) ds, rewritten as D*log1p(d)/d
    # with d = (1 - s^2) D so that s -> 1 needs no special casing
    mu2 = mu * mu
    c = math.sqrt(1.0 + mu2)
    if s <= 0.0:
        return 0.0
    p = math.sqrt(s * s + mu2) / s
    q = math.sqrt(1.0 + mu2 * s * s)
    den = s * s * c * (p + q) * (1.0 + q / c)
    D = mu2 * (1.0 + s * s) / den
    d = (1.0 - s * s) * D
    r = math.log1p(d) / d if d > 1e-12 else 1.0 - 0.5 * d
    return D * r / math.pi


@lru_cache(maxsize=4096)
def _theta_cached(mu: float, abs_tol: float, rel_tol: float, limit: int):
    if mu < _SERIES_BELOW:
        # series remainder is about 0.25 mu^4 relative, below double precision
        return float(theta_asymptotic_small(mu)), 0.0
    # theta ~ mu/pi for small mu, so the absolute tolerance scales with mu
    cfg = QuadratureConfig(abs_tol=abs_tol * min(1.0, mu), rel_tol=rel_tol, max_subdivisions=limit)
    # for small mu the integrand is concentrated on s ~ mu
    pts = [k * mu for k in (0.1, 1.0, 10.0, 100.0, 1000.0) if k * mu < 0.5] or None
    val, err = integrate(lambda s: _regular_integrand(s, mu), 0.0, 1.0, cfg, points=pts, strict=True)
    # rounding can land a few ulp above the supremum for huge mu
    return min(val, PI8), err


def theta_value(mu: float, cfg: QuadratureConfig = _THETA_CFG) -> float:
    """Phase shift as a bare float (memoized)."""
    mu = float(mu)
    if not mu > 0:
        raise ValueError("theta requires mu > 0")
    val, _ = _theta_cached(mu, cfg.abs_tol, cfg.rel_tol, int(cfg.max_subdivisions))
    return val


def theta(mu: float, cfg: QuadratureConfig = _THETA_CFG) -> PhaseShiftEval:
    """Phase shift from the regularized integral over ``(0, 1)``.

    Parameters
    ----------
    mu : float
        Positive wavenumber in natural units.
    cfg : QuadratureConfig, optional
        Quadrature tolerances; results are cached per ``(mu, tolerances)``.

    Returns
    -------
    PhaseShiftEval

    Raises
    ------
    ConsistencyError
        If the value falls outside :func:`theta_bounds` by more than the
        quadrature error estimate.
    """
    mu = float(mu)
    if not mu > 0:
        raise ValueError("theta requires mu > 0")
    val, err = _theta_cached(mu, cfg.abs_tol, cfg.rel_tol, int(cfg.max_subdivisions))
    lo, hi = theta_bounds(mu)
    slack = err + 4 * np.finfo(float).eps
    if val < lo - slack or val > hi + slack:
        raise ConsistencyError(f"theta({mu}) = {val} outside [{lo}, {hi}]")
    return PhaseShiftEval(mu=mu, theta=val, dtheta_dmu=theta_derivative(mu), err_est=err)


def theta_pv(mu: float, cfg: QuadratureConfig = _THETA_CFG) -> float:
    """Phase shift from the principal-value integral over ``(0, inf)``."""
    mu = float(mu)
    if not mu > 0:
        raise ValueError("theta_pv requires mu > 0")
    c = math.sqrt(1.0 + mu * mu)

    def f(s):
        # log(1/2 + 1/2 sqrt((1+s^2)/(1+mu^2))) written via log1p for s near mu
        x = (s * s - mu * mu) / (c * c)
        ratio = math.sqrt(1.0 + x)
        return mu / (s * s - mu * mu) * math.log1p(0.5 * (ratio - 1.0)) / math.pi

    val, _ = integrate_pv(f, mu, 0.0, np.inf, cfg, strict=False)
    return val


def theta_derivative(mu):
    """Closed-form derivative of the phase shift; strictly in ``(0, (2/pi)/(1+mu^2))``."""
    m = np.asarray(mu, dtype=float)
    if np.any(~(m > 0)):
        raise ValueError("theta_derivative requires mu > 0")
    root = np.sqrt(1.0 + m * m)
    # 1 - mu + sqrt(1 + mu^2) without cancellation
    den = 1.0 + 1.0 / (root + m)
    out = np.log1p(2.0 * m / den) / (np.pi * m * (1.0 + m * m))
    return float(out) if out.ndim == 0 else out


def theta_ode(mu: float, anchor: float = _ODE_ANCHOR, cfg: QuadratureConfig = _THETA_CFG) -> float:
    """Phase shift by integrating the derivative from a small anchor.

    The anchor value comes from the small-``mu`` expansion, whose remainder
    is of order ``anchor**5``.
    """
    mu = float(mu)
    if not mu > 0:
        raise ValueError("theta_ode requires mu > 0")
    if mu <= anchor:
        return theta_asymptotic_small(mu)
    pts = [p for p in (1.0, 10.0, 100.0) if anchor < p < mu]
    val, _ = integrate(theta_derivative, anchor, mu, cfg, points=pts or None, strict=True)
    return theta_asymptotic_small(anchor) + val


def theta_asymptotic_small(mu):
    return mu / np.pi - 7.0 * mu ** 3 / (18.0 * np.pi)


def theta_asymptotic_large(mu):
    return PI8 - (1.0 + 2.0 * np.log(2.0 * mu)) / (4.0 * np.pi * mu * mu)


def theta_bounds(mu: float) -> tuple[float, float]:
    lower = max(0.0, PI8 - 2.0 / (np.pi * mu))
    upper = min(2.0 * mu / np.pi, PI8)
    return lower, upper
