"""Mode roots, energy estimates and their error bounds.

All energies are total energies in units of the rest energy ``m c^2`` unless
a function takes :class:`PhysicalParams`, in which case the result is in the
caller's units. Kinetic energies are ``lambda = E - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import ConsistencyError
from .phase_shift import PI8, theta_value
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_semi_inf, u

__all__ = [
    "PhysicalParams",
    "NaturalParams",
    "ModeEstimate",
    "SpectralInterval",
    "IntervalReport",
    "ELECTRON",
    "electron_well",
    "to_natural",
    "energy_to_physical",
    "kinetic",
    "solve_mu_tilde",
    "mode_estimate",
    "mode_estimates",
    "cs1_bounds",
    "cs2_bounds",
    "parity_upper_bounds",
    "explicit_estimate",
    "explicit_estimate_refined",
    "massless_limit",
    "nonrelativistic_limit",
    "large_well_expansion",
    "mu_tilde_refined_bounds",
    "residual_norm_bound",
    "refined_error",
    "spectral_intervals",
    "heat_trace_upper",
]

# constants of the refined residual estimate
_R0, _R1, _R2 = 2.497, 9.356, 10.314
_NORM_DEFECT = 1.251


@dataclass(frozen=True)
class PhysicalParams:
    """Reduced Planck constant, speed of light, mass and well half-width."""

    hbar: float
    c: float
    m: float
    a: float

    def __post_init__(self):
        if not (self.hbar > 0 and self.c > 0 and self.a > 0):
            raise ValueError("hbar, c and a must be positive")
        if not self.m >= 0:
            raise ValueError("mass must be nonnegative")


@dataclass(frozen=True)
class NaturalParams:
    a_bar: float

    def __post_init__(self):
        if not self.a_bar > 0:
            raise ValueError("a_bar must be positive")


# CODATA 2018, SI
ELECTRON = {"hbar": 1.054571817e-34, "c": 299792458.0, "m": 9.1093837015e-31}


def electron_well(width_pm: float) -> PhysicalParams:
    """Electron in a well of full width ``width_pm`` picometres (SI units)."""
    return PhysicalParams(a=0.5 * width_pm * 1e-12, **ELECTRON)


def to_natural(p: PhysicalParams) -> NaturalParams:
    if not p.m > 0:
        raise ValueError("natural units need m > 0; use massless_limit")
    return NaturalParams(p.m * p.c * p.a / p.hbar)


def energy_to_physical(e_natural, p: PhysicalParams):
    return e_natural * p.m * p.c ** 2


def kinetic(xi):
    """``w(xi) = sqrt(xi + 1) - 1``, computed without cancellation."""
    xi = np.asarray(xi, dtype=float)
    out = xi / (np.sqrt(xi + 1.0) + 1.0)
    return float(out) if out.ndim == 0 else out


def _check_mode(a_bar, n):
    if not a_bar > 0:
        raise ValueError("a_bar must be positive")
    if int(n) != n or n < 1:
        raise ValueError("mode index must be a positive integer")


def solve_mu_tilde(a_bar: float, n: int) -> float:
    """Root of ``a_bar mu + theta(mu) = n pi / 2``.

    The root lies in ``((n pi/2 - pi/8)/a_bar, (n pi/2)/a_bar)`` because the
    phase shift takes values in ``(0, pi/8)``; the objective is increasing,
    so the root is unique.
    """
    _check_mode(a_bar, n)
    target = n * math.pi / 2

    def f(mu):
        return a_bar * mu + theta_value(mu) - target

    lo = (target - PI8) / a_bar
    hi = target / a_bar
    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise ConsistencyError(f"root not bracketed: f({lo})={flo}, f({hi})={fhi}")
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)


def cs2_bounds(a_bar: float, n: int) -> tuple[float, float]:
    k = math.pi / (2 * a_bar)
    return math.hypot((n - 1) * k, 1.0), math.hypot(n * k, 1.0)


def cs1_bounds(a_bar: float, n: int) -> tuple[float, float]:
    up = math.hypot(n * math.pi / (2 * a_bar), 1.0)
    return 0.5 * (up + 1.0), up


def parity_upper_bounds(a_bar: float, k: int) -> tuple[float, float]:
    """Upper bounds on the ``k``-th even and ``k``-th odd kinetic eigenvalue."""
    return (kinetic((k * math.pi - math.pi / 2) ** 2 / a_bar ** 2),
            kinetic((k * math.pi) ** 2 / a_bar ** 2))


def _residual_factor(mu, a_bar):
    x = mu * a_bar
    return math.sqrt(_R0 + _R1 / x + _R2 / (x * x))


def residual_norm_bound(a_bar: float, mu: float) -> float:
    """Bound on the residual norm of the glued approximate eigenfunction."""
    return u(a_bar / 3) / (mu * a_bar ** 1.5) * _residual_factor(mu, a_bar)


def refined_error(a_bar: float, mu: float) -> Optional[float]:
    """Refined eigenvalue error; ``None`` unless ``mu a_bar > 1.251``."""
    x = mu * a_bar
    if not x > _NORM_DEFECT:
        return None
    return (u(a_bar / 3) / (mu * a_bar ** 2) * _residual_factor(mu, a_bar)
            / math.sqrt(1.0 - _NORM_DEFECT / x))


@dataclass(frozen=True)
class ModeEstimate:
    n: int
    a_bar: float
    mu_tilde: float
    E_tilde: float
    lambda_tilde: float
    err_simple: float
    err_refined: Optional[float]
    residual_norm_bound: float
    cs2_lower: float
    cs2_upper: float
    weyl2: float
    parity: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def mode_estimate(a_bar: float, n: int) -> ModeEstimate:
    """Energy estimate for mode ``n`` with every available error bound."""
    mu = solve_mu_tilde(a_bar, n)
    E = math.hypot(mu, 1.0)
    lo, hi = cs2_bounds(a_bar, n)
    return ModeEstimate(
        n=int(n),
        a_bar=float(a_bar),
        mu_tilde=mu,
        E_tilde=E,
        lambda_tilde=mu * mu / (E + 1.0),
        err_simple=8.0 / n * (3.0 + 1.0 / a_bar) * math.exp(-a_bar / 3),
        err_refined=refined_error(a_bar, mu),
        residual_norm_bound=residual_norm_bound(a_bar, mu),
        cs2_lower=lo,
        cs2_upper=hi,
        weyl2=(n * math.pi / 2 - PI8) / a_bar,
        parity="even" if n % 2 == 1 else "odd",
    )


def mode_estimates(a_bar: float, ns) -> list[ModeEstimate]:
    return [mode_estimate(a_bar, int(n)) for n in ns]


def mu_tilde_refined_bounds(a_bar: float, n: int) -> tuple[float, float]:
    _check_mode(a_bar, n)
    lower = (n * math.pi / 2 - theta_value(n * math.pi / (2 * a_bar))) / a_bar
    width = min(8 * n / (math.pi * a_bar), 1.0) / (4 * a_bar ** 2 + math.pi ** 2 * (n - 0.25) ** 2)
    return lower, lower + width


# --------------------------------------------------------------------------
# physical-unit formulas


def explicit_estimate(p: PhysicalParams, n: int) -> tuple[float, float]:
    """Energy from the phase shift at the free wavenumber, with error bound.

    Returns ``(value, bound)`` in the units of ``m c^2``; the bound is
    ``12 hbar c / (n a)``.
    """
    a_bar = to_natural(p).a_bar
    mu_free = n * math.pi / (2 * a_bar)
    mu = (n * math.pi / 2 - theta_value(mu_free)) / a_bar
    mc2 = p.m * p.c ** 2
    return mc2 * math.hypot(mu, 1.0), 12 * p.hbar * p.c / (n * p.a)


def explicit_estimate_refined(p: PhysicalParams, n: int) -> tuple[float, float]:
    """Same value as :func:`explicit_estimate` with the two-term bound."""
    a_bar = to_natural(p).a_bar
    value, _ = explicit_estimate(p, n)
    mc2 = p.m * p.c ** 2
    bound = mc2 / (n * a_bar) * (7.309 * u(a_bar / 3) + 4.443 * n ** 3 * a_bar / (n + a_bar) ** 4)
    return value, bound


def massless_limit(hbar: float, c: float, a: float, n: int) -> tuple[float, float]:
    """Massless energy ``(n pi/2 - pi/8) hbar c / a`` and its ``8 hbar c/(a n)`` bound."""
    return (n * math.pi / 2 - PI8) * hbar * c / a, 8 * hbar * c / (a * n)


def nonrelativistic_limit(p: PhysicalParams, n: int) -> float:
    """Rest energy plus the Schroedinger box level."""
    if not p.m > 0:
        raise ValueError("nonrelativistic limit needs m > 0")
    return p.m * p.c ** 2 + (n * math.pi / (2 * p.a)) ** 2 * p.hbar ** 2 / (2 * p.m)


def large_well_expansion(mu: float, n: int) -> float:
    """Energy (units of ``m c^2``) at fixed ``mu = n pi / (2 a_bar)``, to ``o(1/n)``."""
    t = theta_value(mu)
    return math.hypot(mu, 1.0) * (1.0 - mu * mu / (mu * mu + 1.0) * 2.0 * t / (n * math.pi))


# --------------------------------------------------------------------------
# interval disjointness and trace bound


@dataclass(frozen=True)
class SpectralInterval:
    n: int
    center: float
    half_width: float

    @property
    def lower(self):
        return self.center - self.half_width

    @property
    def upper(self):
        return self.center + self.half_width


@dataclass
class IntervalReport:
    a_bar: float
    intervals: list[SpectralInterval]
    disjoint: bool
    second_level_bound: float
    separated_from_second: bool
    wide_intervals: list[tuple[float, float]] = field(default_factory=list)


def spectral_intervals(a_bar: float, n_max: int) -> IntervalReport:
    """Intervals around ``lambda_tilde_n`` (``n >= 3``) each holding one eigenvalue.

    Raises
    ------
    ConsistencyError
        If two intervals overlap or the third one reaches below the upper
        bound for the second kinetic eigenvalue.
    """
    if n_max < 3:
        raise ValueError("n_max must be >= 3")
    ivs, wide = [], []
    for n in range(3, n_max + 1):
        mu = solve_mu_tilde(a_bar, n)
        eps = refined_error(a_bar, mu)
        if eps is None:
            raise ConsistencyError(f"mu a_bar <= {_NORM_DEFECT} at n = {n}")
        lam = mu * mu / (math.hypot(mu, 1.0) + 1.0)
        ivs.append(SpectralInterval(n, lam, eps))
        wide.append((kinetic((n * math.pi / 2 - PI8) ** 2 / a_bar ** 2) - eps,
                     kinetic((n * math.pi / 2) ** 2 / a_bar ** 2) + eps))
    disjoint = all(a.upper < b.lower for a, b in zip(ivs, ivs[1:]))
    second = kinetic(math.pi ** 2 / a_bar ** 2)
    separated = ivs[0].lower > second
    if not (disjoint and separated):
        raise ConsistencyError(f"spectral intervals overlap at a_bar = {a_bar}")
    return IntervalReport(a_bar, ivs, disjoint, second, separated, wide)


def heat_trace_upper(a_bar: float, t: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Upper bound on ``sum_j exp(-lambda_j t)`` over all kinetic eigenvalues."""
    if not t > 0:
        raise ValueError("t must be positive")
    val, _ = integrate_semi_inf(lambda s: math.exp(-t * kinetic(s * s)), 0.0, cfg, strict=True)
    return 2 * a_bar / math.pi * val
