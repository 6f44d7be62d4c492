"""Special functions and numerical integration.

Natural units throughout: lengths in units of hbar/(m c).

The adaptive routines wrap QUADPACK (``scipy.integrate.quad``) behind a small
contract: every call returns ``(value, err_est)`` and either raises
:class:`~qrwell.errors.ConvergenceError` (``strict=True``) or warns when the
subdivision budget runs out.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _integrate
from scipy import special as _special

from .errors import ConvergenceError

__all__ = [
    "QuadratureConfig",
    "KernelEval",
    "DEFAULT_CONFIG",
    "bessel_k1",
    "nu",
    "nu0",
    "nu_inf",
    "kernel_eval",
    "u",
    "integrate",
    "integrate_semi_inf",
    "integrate_pv",
    "tanh_sinh_rule",
    "fixed_tanh_sinh",
]

# below this |z|, z^2 nu(z) is replaced by its limit 1/pi
_Z2NU_SMALL = 1e-8


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and budget for adaptive quadrature.

    Parameters
    ----------
    abs_tol, rel_tol : float
        Requested absolute and relative accuracy.
    max_subdivisions : int
        Bisection budget handed to the adaptive rule.
    tail_cutoff : float or None
        ``None`` maps semi-infinite ranges onto a finite interval and lets the
        adaptive rule decide where the tail is negligible. A float fixes the
        truncation point; callers then supply an analytic tail.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000
    tail_cutoff: Optional[float] = None

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.tail_cutoff is not None and not self.tail_cutoff > 0:
            raise ValueError("tail_cutoff must be positive or None")

    def tol_for(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class KernelEval:
    """Jump kernel and its two tail integrals at a single offset ``z``."""

    z: float
    nu: float
    nu0_to: float
    nu_inf_from: float


# --------------------------------------------------------------------------
# special functions


def bessel_k1(x):
    """Modified Bessel function of the second kind, order one.

    Parameters
    ----------
    x : float or array_like
        Strictly positive argument.

    Returns
    -------
    float or ndarray
        ``K_1(x)``; underflows to zero for ``x`` beyond roughly 700.

    Raises
    ------
    ValueError
        If any ``x <= 0``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise ValueError("bessel_k1 requires x > 0")
    out = _special.k1(xa)
    return float(out) if out.ndim == 0 else out


def nu(z):
    """Kernel density ``K_1(|z|) / (pi |z|)``; singular at ``z = 0``."""
    za = np.abs(np.asarray(z, dtype=float))
    if np.any(za == 0) or np.any(np.isnan(za)):
        raise ValueError("nu is singular at z = 0")
    out = _special.k1(za) / (np.pi * za)
    return float(out) if out.ndim == 0 else out


def _z2nu(z):
    z = abs(z)
    if z < _Z2NU_SMALL:
        return 1.0 / np.pi
    return z * _special.k1(z) / np.pi


def nu0(x: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Second moment of the kernel on ``(0, x)``; bounded by ``min(x, 2)/pi``."""
    if not x > 0:
        raise ValueError("nu0 requires x > 0")
    val, _ = integrate(_z2nu, 0.0, x, cfg, strict=True)
    return val


def _nu_tail_bound(x):
    # nu(z) <= (1+z) e^{-z} / (pi z^2) and (1+z)/z^2 decreases
    return (1.0 + x) * math.exp(-x) / (np.pi * x * x)


def nu_inf(x: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Kernel mass on ``(x, inf)``; bounded by ``1/(pi x)``.

    The range is cut where the exponential envelope of the kernel drops below
    ``abs_tol/10``; the remainder is accounted for in the error only.
    """
    if not x > 0:
        raise ValueError("nu_inf requires x > 0")
    cut = max(x, 1.0)
    while _nu_tail_bound(cut) > cfg.abs_tol / 10:
        cut *= 1.5
    if cut <= x:
        return 0.0
    val, _ = integrate(lambda z: _special.k1(z) / (np.pi * z), x, cut, cfg, strict=True)
    return val


def kernel_eval(z: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> KernelEval:
    az = abs(z)
    return KernelEval(z=z, nu=nu(z), nu0_to=nu0(az, cfg), nu_inf_from=nu_inf(az, cfg))


def u(x):
    """``(1 + x) exp(-x)``, decreasing on the positive half-line."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("u requires x >= 0")
    out = (1.0 + xa) * np.exp(-xa)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# adaptive quadrature


def _report(value, err, tol, strict, what):
    if err > tol:
        msg = f"{what}: error estimate {err:.3g} exceeds tolerance {tol:.3g}"
        if strict:
            raise ConvergenceError(msg, value=value, err_est=err)
        warnings.warn(msg, RuntimeWarning, stacklevel=3)


def _quad(f, lo, hi, cfg, points=None, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(
            f, lo, hi,
            epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
            limit=int(cfg.max_subdivisions), points=points, full_output=1, **kw,
        )
    return out[0], out[1]


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    points=None,
    strict: bool = False,
) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of ``f`` over a finite interval.

    Parameters
    ----------
    f : callable
        Scalar integrand.
    lo, hi : float
        Finite limits.
    cfg : QuadratureConfig
        Tolerances and subdivision budget.
    points : sequence of float, optional
        Interior break points (kinks, integrable singularities).
    strict : bool
        Raise instead of warn when the budget is exhausted.

    Returns
    -------
    value, err_est : float
    """
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("integrate needs finite limits; use integrate_semi_inf")
    if lo == hi:
        return 0.0, 0.0
    val, err = _quad(f, lo, hi, cfg, points=points)
    _report(val, err, cfg.tol_for(val), strict, "integrate")
    return val, err


def integrate_semi_inf(
    f: Callable[[float], float],
    lo: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    tail: Optional[Callable[[float], tuple[float, float]]] = None,
    strict: bool = False,
) -> tuple[float, float]:
    """Integral of ``f`` over ``(lo, inf)``.

    With ``cfg.tail_cutoff = None`` the half-line is mapped onto a finite
    interval. With a fixed cutoff ``X`` the finite part is integrated
    adaptively and ``tail(X)`` must return ``(value, bound)`` for the
    remainder; without ``tail`` the piece on ``(X, 2X)`` serves as a crude
    bound and is added to the error only.
    """
    if cfg.tail_cutoff is None:
        val, err = _quad(f, lo, np.inf, cfg)
        _report(val, err, cfg.tol_for(val), strict, "integrate_semi_inf")
        return val, err
    cut = max(float(cfg.tail_cutoff), lo)
    val, err = _quad(f, lo, cut, cfg) if cut > lo else (0.0, 0.0)
    if tail is not None:
        tv, tb = tail(cut)
        val += tv
        err += abs(tb)
    else:
        extra, _ = _quad(f, cut, 2 * cut, cfg)
        err += abs(extra)
    _report(val, err, cfg.tol_for(val), strict, "integrate_semi_inf")
    return val, err


def integrate_pv(
    f: Callable[[float], float],
    singularity: float,
    lo: float,
    hi: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    strict: bool = False,
) -> tuple[float, float]:
    """Cauchy principal value of ``f`` over ``(lo, hi)`` with a simple pole.

    The pole at ``s`` is removed by folding: ``f(s + t) + f(s - t)`` is
    integrated over ``(0, r)`` with ``r = min(s - lo, hi - s)``, and the
    unpaired remainder is integrated directly. ``hi`` may be ``inf``.

    Examples
    --------
    >>> v, e = integrate_pv(lambda s: 1.0 / (s - 1.0), 1.0, 0.0, 2.0)
    >>> abs(v) < 1e-12
    True
    """
    s = float(singularity)
    if not lo < s < hi:
        raise ValueError("singularity must lie strictly inside (lo, hi)")
    r = min(s - lo, hi - s)

    def folded(t):
        return f(s + t) + f(s - t)

    val, err = _quad(folded, 0.0, r, cfg)
    if s - r > lo:
        v, e = _quad(f, lo, s - r, cfg)
        val += v
        err += e
    if s + r < hi:
        if np.isinf(hi):
            v, e = _quad(f, s + r, np.inf, cfg)
        else:
            v, e = _quad(f, s + r, hi, cfg)
        val += v
        err += e
    _report(val, err, cfg.tol_for(val), strict, "integrate_pv")
    return val, err


# --------------------------------------------------------------------------
# fixed tanh-sinh rule on (0, 1)


@lru_cache(maxsize=16)
def tanh_sinh_rule(level: int = 6):
    """Nodes and weights of the tanh-sinh rule on ``(0, 1)``.

    Returns ``(t, tc, w)`` where ``tc = 1 - t`` is computed without
    cancellation, so integrands singular at either end can use whichever
    distance is small. Step size is ``2**-level``; the abscissa range is cut
    where ``tc`` would underflow.
    """
    h = 2.0 ** -level
    k = np.arange(-int(6.0 / h), int(6.0 / h) + 1)
    uu = k * h
    v = 0.5 * np.pi * np.sinh(uu)
    t = 0.5 * (1.0 + np.tanh(v))
    t = np.where(v < 0, 1.0 / (1.0 + np.exp(-2.0 * v)), t)
    tc = 1.0 / (1.0 + np.exp(2.0 * v))
    w = h * np.pi * np.cosh(uu) * t * tc
    keep = (w > 0) & (t > 0) & (tc > 0)
    t, tc, w = t[keep], tc[keep], w[keep]
    t.setflags(write=False)
    tc.setflags(write=False)
    w.setflags(write=False)
    return t, tc, w, k[keep] % 2 == 0


def fixed_tanh_sinh(g, level: int = 6):
    """Apply the fixed tanh-sinh rule to ``g(t, tc)``.

    ``g`` receives 1-D node arrays and returns values whose last axis runs
    over nodes, so a batch of integrals costs one call. The error estimate
    is the difference to the rule with twice the step.
    """
    t, tc, w, even = tanh_sinh_rule(level)
    vals = np.asarray(g(t, tc))
    # 0 * inf products at the extreme nodes carry no weight
    vals = np.where(np.isfinite(vals), vals, 0.0)
    fine = vals @ w
    coarse = vals[..., even] @ (2.0 * w[even])
    return fine, np.abs(fine - coarse)
