"""Half-line generalized eigenfunctions and approximate well eigenfunctions.

The half-line wave with wavenumber ``mu`` is ``F(x) = sin(mu x + theta) - G(x)``
for ``x > 0``. The correction ``G`` is the Laplace transform of a density
``gamma`` on ``(1, inf)``, so it is completely monotone. Gluing two shifted
half-line waves with a smooth partition of unity gives an approximate
eigenfunction of the well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .phase_shift import theta_value
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    fixed_tanh_sinh,
    integrate,
    tanh_sinh_rule,
    u,
)
from .spectrum import PhysicalParams, solve_mu_tilde, to_natural

__all__ = [
    "GProfile",
    "WaveApprox",
    "exponent_integral",
    "gamma_mu",
    "g_profile",
    "G",
    "G_integral",
    "F",
    "laplace_F",
    "laplace_F_direct",
    "laplace_bound",
    "bump_q",
    "phi_tilde",
    "f_n",
    "phi_tilde_norm_sq",
    "norm_sq_bounds",
    "eigenfunction_error_bounds",
    "interval_integral",
]

_LEVEL = 6
# nodes with 1 - t below this are dropped (r > 1e80); their mass is < 1e-40
_TC_MIN = 1e-40
_BIG_LOG = 300.0


def _log_term(log_s, c):
    """``log(1 + sqrt(1 + s^2) / c)`` from ``log s``, safe for huge ``s``."""
    big = log_s > _BIG_LOG
    s = np.exp(np.where(big, 0.0, log_s))
    small_form = np.log1p(np.hypot(1.0, s) / c)
    return np.where(big, log_s - math.log(c), small_form)


def exponent_integral(mu: float, xi, level: int = _LEVEL):
    """``(1/pi) int_0^inf xi log(1 + sqrt((1+s^2)/(1+mu^2))) / (xi^2 + s^2) ds``.

    Accepts real positive or complex ``xi`` with positive real part. The
    half-line is mapped onto ``(0, 1)`` by ``s = |xi| t / (1 - t)``.

    Returns
    -------
    value, err_est : ndarray
    """
    xi = np.asarray(xi)
    cplx = np.iscomplexobj(xi)
    if cplx:
        if np.any(xi.real <= 0):
            raise ValueError("need Re xi > 0")
    elif np.any(xi <= 0):
        raise ValueError("need xi > 0")
    c = math.sqrt(1.0 + mu * mu)
    flat = xi.reshape(-1, 1)
    rho = np.abs(flat)

    def g(t, tc):
        log_s = np.log(rho) + np.log(t) - np.log(tc)
        L = _log_term(log_s, c)
        if cplx:
            return flat * rho * L / (flat * flat * tc * tc + rho * rho * t * t) / np.pi
        # real case: xi = rho and the map removes xi entirely
        return L / (tc * tc + t * t) / np.pi

    val, err = fixed_tanh_sinh(g, level)
    return val.reshape(xi.shape), err.reshape(xi.shape)


def _gamma_prefactor(mu):
    return math.sqrt(2.0) / (2.0 * math.pi) * mu / math.sqrt(1.0 + mu * mu)


def _exponent_cutoff(mu, r, cutoff, cfg):
    # finite part by adaptive quadrature, remainder from the large-s expansion
    # log(s/c) + c/s + (1 - c^2)/(2 s^2) and 1/(r^2 + s^2) = s^-2 - r^2 s^-4
    c = math.sqrt(1.0 + mu * mu)
    S = float(cutoff)

    def f(s):
        return r * math.log1p(math.hypot(1.0, s) / c) / (r * r + s * s)

    head, _ = integrate(f, 0.0, S, cfg, points=[r] if r < S else None, strict=True)
    lg = math.log(S / c)
    tail = r * ((lg + 1.0) / S + c / (2 * S * S) + (1.0 - c * c) / (6 * S ** 3)
                - r * r * (lg + 1.0 / 3.0) / (3 * S ** 3))
    return (head + tail) / math.pi


def gamma_mu(mu: float, r, cutoff: Optional[float] = None,
             cfg: QuadratureConfig = QuadratureConfig(abs_tol=1e-13, rel_tol=1e-12)):
    """Density of the completely monotone correction, supported on ``r > 1``.

    Parameters
    ----------
    mu : float
        Wavenumber.
    r : float or array_like
        Points; the density is zero for ``r <= 1``.
    cutoff : float, optional
        If given, the inner integral is truncated at ``s = cutoff`` and the
        remainder is added from its large-``s`` expansion. Otherwise the
        half-line is compactified and no truncation happens.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r > 1.0
    rr = r[inside]
    if rr.size:
        if cutoff is None:
            J, _ = exponent_integral(mu, rr)
        else:
            J = np.array([_exponent_cutoff(mu, x, max(cutoff, 1e3 * x), cfg) for x in rr])
        out[inside] = (_gamma_prefactor(mu) * np.sqrt((rr - 1.0) * (rr + 1.0))
                       / (mu * mu + rr * rr) * np.exp(-J))
    return float(out) if out.ndim == 0 else out


class GProfile:
    """Tabulated density for one wavenumber; evaluates ``G`` and derivatives.

    The density is evaluated once on a fixed tanh-sinh node set under
    ``r = (1 - t)**-2``; afterwards ``G(x) = sum_k W_k exp(-x r_k)`` costs
    one matrix-vector product for any batch of ``x``.

    Attributes
    ----------
    mu : float
    theta : float
        Phase shift at ``mu``.
    I_mu : float
        Integral of ``G`` over the half-line.
    G0_plus : float
        Total density mass, equal to ``G(0+)``.
    """

    def __init__(self, mu: float, level: int = _LEVEL):
        if not mu > 0:
            raise ValueError("mu must be positive")
        self.mu = float(mu)
        self.level = level
        self.theta = theta_value(self.mu)
        t, tc, w, even = tanh_sinh_rule(level)
        keep = tc > _TC_MIN
        t, tc, w, even = t[keep], tc[keep], w[keep], even[keep]
        r = 1.0 / (tc * tc)
        J, _ = exponent_integral(self.mu, r, level)
        # gamma(r) dr/dt written in t, tc to avoid forming r^2 - 1
        dens = (2.0 * _gamma_prefactor(self.mu) * np.sqrt(t * (1.0 + tc) * (1.0 + tc * tc))
                / (tc * (1.0 + self.mu ** 2 * tc ** 4)) * np.exp(-J))
        self.r = r
        self.weights = w * dens
        self._coarse = np.where(even, 2.0 * w * dens, 0.0)
        self.G0_plus = float(self.weights.sum())
        self.I_mu = float(self.weights @ (1.0 / r))
        self.I_mu_err = float(abs(self.I_mu - self._coarse @ (1.0 / r)))

    def density(self, r):
        return gamma_mu(self.mu, r)

    def _moment(self, x, power):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        if np.any(flat <= 0):
            raise ValueError("G is evaluated for x > 0 only")
        # combine in log space: exp(-x r) underflows where r**power overflows
        E = np.exp(power * np.log(self.r) - np.outer(flat, self.r))
        return (E @ self.weights).reshape(x.shape), (E @ self._coarse).reshape(x.shape)

    def __call__(self, x):
        val, _ = self._moment(x, 0)
        return float(val) if val.ndim == 0 else val

    def error(self, x):
        val, coarse = self._moment(x, 0)
        return np.abs(val - coarse)

    def derivative(self, x, order: int = 1):
        """``d^k G / dx^k``; sign alternates with ``k``."""
        val, _ = self._moment(x, order)
        val = (-1) ** order * val
        return float(val) if val.ndim == 0 else val

    def I_mu_closed_form(self) -> float:
        mu = self.mu
        c = math.sqrt(1.0 + mu * mu)
        return (math.cos(self.theta) - math.sqrt((1.0 + c) / (2.0 * c))) / mu


@lru_cache(maxsize=256)
def g_profile(mu: float) -> GProfile:
    return GProfile(float(mu))


def G(mu: float, x):
    """Completely monotone correction at ``x > 0``."""
    return g_profile(float(mu))(x)


def G_integral(mu: float) -> tuple[float, float]:
    """``(quadrature, closed_form)`` for the half-line integral of ``G``."""
    prof = g_profile(float(mu))
    return prof.I_mu, prof.I_mu_closed_form()


def F(mu: float, x):
    """Half-line generalized eigenfunction; zero for ``x <= 0``."""
    prof = g_profile(float(mu))
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    if np.any(pos):
        xp = x[pos]
        out[pos] = np.sin(prof.mu * xp + prof.theta) - prof(xp)
    return float(out) if out.ndim == 0 else out


def laplace_F(mu: float, xi):
    """Closed-form Laplace transform of :func:`F` for ``Re xi > 0``."""
    xi = np.asarray(xi)
    den = mu * mu + xi * xi
    if np.any(np.abs(den) < 1e-12):
        raise ValueError("xi too close to the pole at +-i mu")
    J, _ = exponent_integral(mu, xi)
    out = math.sqrt(2.0) / 2.0 * mu / den * np.exp(J)
    return out.item() if out.ndim == 0 else out


def laplace_F_direct(mu: float, xi: complex, cfg: QuadratureConfig = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-11)):
    """Laplace transform of :func:`F` by quadrature in ``x``.

    The free part ``sin(mu x + theta)`` is transformed exactly; only the
    correction ``G`` is integrated numerically.
    """
    prof = g_profile(float(mu))
    th = prof.theta
    free = (mu * math.cos(th) + xi * math.sin(th)) / (mu * mu + xi * xi)
    xr, xim = float(np.real(xi)), float(np.imag(xi))

    def part(fn):
        head, _ = integrate(lambda x: prof(x) * fn(x), 0.0, 1.0, cfg, strict=True)
        rest, _ = _semi(lambda x: prof(x) * fn(x), 1.0, cfg)
        return head + rest

    re = part(lambda x: math.exp(-xr * x) * math.cos(xim * x))
    if xim == 0.0:
        return float(np.real(free)) - re
    im = part(lambda x: -math.exp(-xr * x) * math.sin(xim * x))
    return free - (re + 1j * im)


def _semi(f, lo, cfg):
    from .quadrature import integrate_semi_inf
    return integrate_semi_inf(f, lo, cfg, strict=True)


def laplace_bound(mu: float, xi, C: Optional[float] = None) -> float:
    """Upper bound on ``|L F(xi)|``; ``C`` defaults to sqrt(2) (real) or 2 (complex)."""
    xi = complex(xi)
    if C is None:
        C = math.sqrt(2.0) if xi.imag == 0 else 2.0
    a = abs(xi)
    return C * abs(mu / (mu * mu + xi * xi)) * math.sqrt(1.0 + math.sqrt((1.0 + a * a) / (1.0 + mu * mu)))


# --------------------------------------------------------------------------
# glued approximate eigenfunction


def bump_q(x, b: float):
    """C^1 piecewise-quadratic step from 0 (``x <= -b``) to 1 (``x >= b``)."""
    if not b > 0:
        raise ValueError("b must be positive")
    y = np.clip(np.asarray(x, dtype=float) / b, -1.0, 1.0)
    out = np.where(y <= 0, 0.5 * (y + 1.0) ** 2, 1.0 - 0.5 * (y - 1.0) ** 2)
    return float(out) if out.ndim == 0 else out


def f_n(a_bar: float, n: int, x, mu: Optional[float] = None):
    """Cosine (odd ``n``) or sine (even ``n``) approximant, zero outside the well."""
    mu = solve_mu_tilde(a_bar, n) if mu is None else mu
    x = np.asarray(x, dtype=float)
    trig = np.cos if n % 2 == 1 else np.sin
    out = np.where(np.abs(x) < a_bar, trig(mu * x) / math.sqrt(a_bar), 0.0)
    return float(out) if out.ndim == 0 else out


def phi_tilde(a_bar: float, n: int, x, b: Optional[float] = None, mu: Optional[float] = None):
    """Two half-line waves glued at the walls ``-a_bar`` and ``a_bar``."""
    b = a_bar / 3 if b is None else b
    mu = solve_mu_tilde(a_bar, n) if mu is None else mu
    x = np.asarray(x, dtype=float)
    sign = -1.0 if n % 2 == 0 else 1.0
    out = bump_q(-x, b) * F(mu, a_bar + x) + sign * bump_q(x, b) * F(mu, a_bar - x)
    out = np.where(np.abs(x) < a_bar, out, 0.0)
    return float(out) if out.ndim == 0 else out


def interval_integral(fn, lo: float, hi: float, breaks=(), level: int = 7) -> float:
    """Integrate a vectorized ``fn`` over ``(lo, hi)`` with tanh-sinh panels.

    Panels end at the break points, so kinks and endpoint square-root
    behaviour cost nothing extra.
    """
    edges = np.unique(np.clip(np.concatenate([[lo, hi], np.asarray(breaks, float)]), lo, hi))
    t, tc, w, _ = tanh_sinh_rule(level)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        h = b - a
        # nodes measured from whichever end is closer
        x = np.where(t < 0.5, a + h * t, b - h * tc)
        total += h * (w @ fn(x))
    return float(total)


def phi_tilde_norm_sq(a_bar: float, n: int, b: Optional[float] = None) -> float:
    b = a_bar / 3 if b is None else b
    mu = solve_mu_tilde(a_bar, n)
    return interval_integral(lambda x: phi_tilde(a_bar, n, x, b, mu) ** 2,
                             -a_bar, a_bar, breaks=(-b, 0.0, b))


def norm_sq_bounds(a_bar: float, n: int) -> tuple[float, float]:
    mu = solve_mu_tilde(a_bar, n)
    prof = g_profile(mu)
    s = math.sin(prof.theta)
    return (a_bar - s / mu - 4 * prof.I_mu,
            a_bar + s / mu + 4 * prof.I_mu * (1.0 + s))


@dataclass(frozen=True)
class WaveApprox:
    """Evaluable approximate eigenfunction.

    ``kind`` is one of ``"f_n"``, ``"phi_tilde"`` or ``"F_halfline"``; for
    the last, ``index`` holds the wavenumber and ``a_bar`` is unused.
    """

    kind: str
    index: float
    a_bar: Optional[float] = None
    b: Optional[float] = None

    def __call__(self, x):
        if self.kind == "F_halfline":
            return F(self.index, x)
        if self.kind == "f_n":
            return f_n(self.a_bar, int(self.index), x)
        if self.kind == "phi_tilde":
            return phi_tilde(self.a_bar, int(self.index), x, self.b)
        raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def parity(self) -> Optional[str]:
        if self.kind == "F_halfline":
            return None
        return "even" if int(self.index) % 2 == 1 else "odd"

    def l2_norm_sq_bounds(self):
        if self.kind != "phi_tilde":
            raise ValueError("norm bounds exist for the glued approximation only")
        return norm_sq_bounds(self.a_bar, int(self.index))


def eigenfunction_error_bounds(p: PhysicalParams, n: int) -> tuple[float, float, float]:
    """``(l2_bound, sup_bound, l2_refined)`` in the units of ``p``.

    The refined bound concerns the normalized glued approximation and is
    returned in natural units.
    """
    a_bar = to_natural(p).a_bar
    l2 = math.sqrt(p.m * p.c / p.hbar) * min(10 / math.sqrt(n), 55 * p.hbar * math.sqrt(n) / (p.m * p.c * p.a))
    sup = 8 / math.sqrt(p.a)
    norm = math.sqrt(phi_tilde_norm_sq(a_bar, n))
    refined = (1.455 * u(a_bar / 3) * math.sqrt(4 * a_bar ** 2 + math.pi ** 2)
               * math.sqrt(a_bar) / (n * norm))
    return l2, sup, refined
