"""Rayleigh-Ritz reference solver for the well.

The quadratic form of ``sqrt(-d^2/dx^2 + 1)`` is projected onto the Dirichlet
sines ``e_k(x) = a^-1/2 sin(k pi (x + a) / (2 a))`` of ``(-a, a)``. Odd ``k``
span even functions, even ``k`` odd functions, so the matrix splits into two
parity blocks.

With ``kappa_k = k pi / (2 a)`` and ``m(xi) = sqrt(xi^2 + 1)`` a block entry is

    M_jk = (2 kappa_j kappa_k / (pi a)) int_0^inf m (1 - s cos 2 a xi)
           / ((kappa_j^2 - xi^2)(kappa_k^2 - xi^2)) dxi,   s = (-1)^k.

Partial fractions reduce every off-diagonal entry to a difference of the
single integrals ``Q_k``, so a block of size ``N`` needs ``O(N)`` integrals.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate as _integrate

from .eigenfunctions import f_n, interval_integral, phi_tilde, phi_tilde_norm_sq
from .errors import ConvergenceError
from .quadrature import QuadratureConfig

__all__ = [
    "RRConfig",
    "OracleSpectrum",
    "RichardsonResult",
    "ApproxComparison",
    "basis_function",
    "basis_fourier",
    "assemble",
    "solve",
    "solve_cached",
    "richardson",
    "eigenfunction_eval",
    "compare_to_approx",
    "weyl_check",
    "phase_fit",
]


@dataclass(frozen=True)
class RRConfig:
    """Basis size and integration settings for the reference solver.

    ``n_basis`` counts sines per parity block; ``xi_cutoff = None`` picks the
    panel range automatically (at least four times the top basis frequency).
    """

    n_basis: int = 128
    xi_cutoff: Optional[float] = None
    quad: QuadratureConfig = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-12)
    panel_order: int = 24

    def __post_init__(self):
        if self.n_basis < 4:
            raise ValueError("n_basis must be >= 4")
        if self.xi_cutoff is not None and not self.xi_cutoff > 0:
            raise ValueError("xi_cutoff must be positive")


@dataclass
class OracleSpectrum:
    """Merged Rayleigh-Ritz spectrum (total energies, units of ``m c^2``).

    ``eigenvectors[:, j]`` holds the coefficients of eigenvalue ``j`` on the
    sines ``k = 1 .. 2 n_basis``.
    """

    a_bar: float
    eigenvalues: np.ndarray
    parities: list
    eigenvectors: np.ndarray
    n_basis: int
    tail_error_bound: float
    xi_cutoff: float = 0.0

    @property
    def trusted(self) -> int:
        return self.n_basis // 4

    def as_dict(self) -> dict:
        return {
            "a_bar": self.a_bar,
            "n_basis": self.n_basis,
            "eigenvalues": [float(e) for e in self.eigenvalues],
            "parities": list(self.parities),
            "tail_error_bound": self.tail_error_bound,
        }


# --------------------------------------------------------------------------
# basis


def basis_function(k: int, a_bar: float, x):
    x = np.asarray(x, dtype=float)
    kap = k * math.pi / (2 * a_bar)
    out = np.where(np.abs(x) < a_bar, np.sin(kap * (x + a_bar)) / math.sqrt(a_bar), 0.0)
    return float(out) if out.ndim == 0 else out


def basis_fourier(k: int, a_bar: float, xi):
    """Fourier transform ``int e^{i xi x} e_k(x) dx`` of a basis sine.

    Uses ``1 - s e^{2 i a xi} = -2i e^{i a d} sin(a d)`` with ``d = xi - kappa``
    so the removable poles at ``xi = +-kappa`` need no special case.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    xi = np.asarray(xi, dtype=float)
    kap = k * math.pi / (2 * a_bar)
    ax = np.abs(xi)
    d = ax - kap
    # sin(a d)/d
    sd = a_bar * np.sinc(a_bar * d / math.pi)
    val = (np.exp(-1j * ax * a_bar) * kap * 2j * np.exp(1j * a_bar * d) * sd
           / ((kap + ax) * math.sqrt(a_bar)))
    out = np.where(xi < 0, np.conj(val), val)
    return complex(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# assembly


def _panels(xi_max, period, order):
    npan = int(round(xi_max / period))
    x, w = leggauss(order)
    edges = np.arange(npan) * period
    nodes = (edges[:, None] + (x[None, :] + 1.0) * period / 2).ravel()
    weights = np.tile(w * period / 2, npan)
    return nodes, weights


def _quad(f, lo, cfg, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        out = _integrate.quad(f, lo, np.inf, epsabs=cfg.abs_tol * 1e-2, epsrel=cfg.rel_tol,
                              limit=int(cfg.max_subdivisions), full_output=1, **kw)
    return out[0], out[1]


def _block_integrals(a_bar, ks, xi_max, cfg: RRConfig):
    """``Q_k`` and ``D_k`` with error estimates for one parity block."""
    ks = np.asarray(ks)
    kap = ks * math.pi / (2 * a_bar)
    sigma = 1.0 if ks[0] % 2 == 0 else -1.0
    omega = 2 * a_bar
    period = math.pi / a_bar
    order = cfg.panel_order
    xi, w = _panels(xi_max, period, order)
    xi_lo, w_lo = _panels(xi_max, period, max(order - 8, 8))
    Q = np.empty(len(ks))
    D = np.empty(len(ks))
    dQ = np.empty(len(ks))
    dD = np.empty(len(ks))

    def finite(kappa, nodes, weights):
        m = np.sqrt(nodes * nodes + 1.0)
        d = nodes - kappa
        sd = a_bar * np.sinc(a_bar * d / math.pi)
        s = np.sin(a_bar * d)
        fq = -2.0 * m * s * sd / (nodes + kappa) + 1.0 / m
        fd = 2.0 * m * sd * sd / (nodes + kappa) ** 2
        return weights @ fq, weights @ fd

    q_cfg = cfg.quad
    for i, kappa in enumerate(kap):
        k2 = kappa * kappa
        q, d = finite(kappa, xi, w)
        q_lo, d_lo = finite(kappa, xi_lo, w_lo)
        eq, ed = abs(q - q_lo), abs(d - d_lo)
        # tails beyond xi_max; xi_max is a multiple of the oscillation period
        v, e = _quad(lambda s: math.sqrt(s * s + 1) / (k2 - s * s) + 1 / math.sqrt(s * s + 1), xi_max, q_cfg)
        q += v
        eq += e
        v, e = _quad(lambda s: math.sqrt(s * s + 1) / (s * s - k2), xi_max, q_cfg, weight="cos", wvar=omega)
        q += sigma * v
        eq += e
        v, e = _quad(lambda s: math.sqrt(s * s + 1) * k2 / (s * s - k2) ** 2, xi_max, q_cfg)
        d = d * k2 + v
        ed = ed * k2 + e
        v, e = _quad(lambda s: math.sqrt(s * s + 1) * k2 / (s * s - k2) ** 2, xi_max, q_cfg, weight="cos", wvar=omega)
        d -= sigma * v
        ed += e
        Q[i], D[i], dQ[i], dD[i] = q, d, eq, ed
    return kap, Q, D, dQ, dD


def _block_matrix(a_bar, kap, Q, D, dQ, dD):
    pref = 2.0 / (math.pi * a_bar)
    kk = np.outer(kap, kap)
    diff = kap[None, :] ** 2 - kap[:, None] ** 2
    np.fill_diagonal(diff, 1.0)
    M = pref * kk * (Q[:, None] - Q[None, :]) / diff
    E = pref * kk * (dQ[:, None] + dQ[None, :]) / np.abs(diff)
    np.fill_diagonal(M, pref * D)
    np.fill_diagonal(E, pref * dD)
    M = 0.5 * (M + M.T)
    return M, E


def _xi_max(a_bar, cfg: RRConfig):
    period = math.pi / a_bar
    kap_max = 2 * cfg.n_basis * math.pi / (2 * a_bar)
    want = max(4 * kap_max, 50.0) if cfg.xi_cutoff is None else cfg.xi_cutoff
    if want < 2 * kap_max:
        raise ConvergenceError(f"xi_cutoff {want} below twice the top basis frequency; "
                               f"use at least {4 * kap_max:.4g}")
    return period * math.ceil(want / period)


def assemble(a_bar: float, cfg: RRConfig = RRConfig(), with_errors: bool = False):
    """Even and odd parity blocks of the Rayleigh-Ritz matrix.

    Returns ``(even, odd)`` or, with ``with_errors``, ``(even, odd, err_even,
    err_odd)`` where the last two bound the entrywise integration error.

    Raises
    ------
    ConvergenceError
        If the entrywise error bound exceeds ``cfg.quad.abs_tol`` relative to
        the matrix scale.
    """
    if not a_bar > 0:
        raise ValueError("a_bar must be positive")
    N = cfg.n_basis
    xi_max = _xi_max(a_bar, cfg)
    blocks = []
    for ks in (np.arange(1, 2 * N, 2), np.arange(2, 2 * N + 1, 2)):
        kap, Q, D, dQ, dD = _block_integrals(a_bar, ks, xi_max, cfg)
        blocks.append(_block_matrix(a_bar, kap, Q, D, dQ, dD))
    (Me, Ee), (Mo, Eo) = blocks
    scale = max(np.abs(np.diag(Me)).max(), np.abs(np.diag(Mo)).max())
    worst = max(Ee.max(), Eo.max())
    if worst > max(cfg.quad.abs_tol, cfg.quad.rel_tol) * scale * 1e3:
        raise ConvergenceError(f"matrix entry error {worst:.3g} too large; raise xi_cutoff "
                               f"above {2 * xi_max:.4g}", err_est=worst)
    if with_errors:
        return Me, Mo, Ee, Eo
    return Me, Mo


def solve(a_bar: float, cfg: RRConfig = RRConfig()) -> OracleSpectrum:
    """Variational eigenvalues (upper bounds on the true ones) and vectors."""
    Me, Mo, Ee, Eo = assemble(a_bar, cfg, with_errors=True)
    N = cfg.n_basis
    ve, Ve = np.linalg.eigh(Me)
    vo, Vo = np.linalg.eigh(Mo)
    vals = np.concatenate([ve, vo])
    par = np.array(["even"] * N + ["odd"] * N)
    vecs = np.zeros((2 * N, 2 * N))
    vecs[0::2, :N] = Ve
    vecs[1::2, N:] = Vo
    order = np.argsort(vals, kind="stable")
    # Weyl: eigenvalues move by at most the spectral norm of the error matrix
    tail = float(max(np.linalg.norm(Ee), np.linalg.norm(Eo)))
    return OracleSpectrum(
        a_bar=float(a_bar),
        eigenvalues=vals[order],
        parities=list(par[order]),
        eigenvectors=vecs[:, order],
        n_basis=N,
        tail_error_bound=tail,
        xi_cutoff=_xi_max(a_bar, cfg),
    )


@lru_cache(maxsize=32)
def solve_cached(a_bar: float, n_basis: int) -> OracleSpectrum:
    return solve(float(a_bar), RRConfig(n_basis=int(n_basis)))


# --------------------------------------------------------------------------
# convergence margin


@dataclass
class RichardsonResult:
    """Eigenvalues at several basis sizes and the extrapolated limit.

    ``margin[j]`` estimates how far the finest level sits above the limit,
    plus the integration error bound of the finest level.
    """

    levels: tuple
    values: np.ndarray
    extrapolated: np.ndarray
    margin: np.ndarray
    rate: np.ndarray
    finest: OracleSpectrum = field(repr=False, default=None)


def richardson(a_bar: float, count: int, levels: Sequence[int] = (64, 128, 256)) -> RichardsonResult:
    specs = [solve_cached(float(a_bar), int(n)) for n in levels]
    vals = np.array([s.eigenvalues[:count] for s in specs])
    d1 = vals[-2] - vals[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d1 / (vals[-3] - vals[-2]) if len(levels) >= 3 else np.full(count, 0.5)
    ok = np.isfinite(ratio) & (ratio > 0) & (ratio < 1)
    r = np.where(ok, ratio, 0.5)
    extrap = vals[-1] - d1 * r / (1 - r)
    # a non-geometric sequence gets the full last difference as margin
    margin = np.where(ok, np.abs(vals[-1] - extrap), np.abs(d1)) + specs[-1].tail_error_bound
    rate = np.where(ok, -np.log2(r), np.nan)
    return RichardsonResult(tuple(levels), vals, extrap, margin, rate, specs[-1])


# --------------------------------------------------------------------------
# eigenfunctions


def _check_trusted(spec: OracleSpectrum, n: int):
    if not 1 <= n <= spec.trusted:
        raise ValueError(f"n = {n} outside trusted range 1..{spec.trusted}")


def eigenfunction_eval(spec: OracleSpectrum, n: int, x):
    """Rayleigh-Ritz eigenfunction ``n`` (1-based), unit L2 norm."""
    _check_trusted(spec, n)
    x = np.asarray(x, dtype=float)
    coef = spec.eigenvectors[:, n - 1]
    ks = np.nonzero(coef)[0] + 1
    a = spec.a_bar
    kap = ks * math.pi / (2 * a)
    S = np.sin(np.multiply.outer(x + a, kap)) / math.sqrt(a)
    out = S @ coef[ks - 1]
    out = np.where(np.abs(x) < a, out, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ApproxComparison:
    n: int
    l2_dist_fn: float
    l2_dist_phi_tilde: float
    sup_norm: float
    sign: int


def compare_to_approx(spec: OracleSpectrum, n: int, grid: int = 8001) -> ApproxComparison:
    """Distances from eigenfunction ``n`` to the sine/cosine and glued approximants.

    The sign of the reference eigenfunction is chosen to maximize its overlap
    with the sine/cosine approximant.
    """
    _check_trusted(spec, n)
    a = spec.a_bar
    from .spectrum import solve_mu_tilde

    mu = solve_mu_tilde(a, n)
    b = a / 3
    breaks = (-b, 0.0, b)

    def phi(x):
        return eigenfunction_eval(spec, n, x)

    overlap = interval_integral(lambda x: phi(x) * f_n(a, n, x, mu), -a, a, breaks)
    sign = 1 if overlap >= 0 else -1
    d_fn = interval_integral(lambda x: (sign * phi(x) - f_n(a, n, x, mu)) ** 2, -a, a, breaks)
    norm = math.sqrt(phi_tilde_norm_sq(a, n))

    def glued(x):
        return phi_tilde(a, n, x, b, mu) / norm

    # the glued approximant carries its own sign convention
    s2 = 1 if interval_integral(lambda x: phi(x) * glued(x), -a, a, breaks) >= 0 else -1
    d_pt = interval_integral(lambda x: (s2 * phi(x) - glued(x)) ** 2, -a, a, breaks)
    xs = np.linspace(-a, a, grid)
    sup = float(np.abs(phi(xs)).max())
    return ApproxComparison(n, math.sqrt(d_fn), math.sqrt(d_pt), sup, sign)


def weyl_check(spec: OracleSpectrum, n_range) -> list[dict]:
    """Residual of the two-term Weyl value per level, and ``n`` times it."""
    rows = []
    for n in n_range:
        _check_trusted(spec, n)
        res = spec.eigenvalues[n - 1] * spec.a_bar - (n * math.pi / 2 - math.pi / 8)
        rows.append({"n": int(n), "residual": float(res), "n_residual": float(n * res),
                     "one_term_ratio": float(spec.eigenvalues[n - 1] * 2 * spec.a_bar / (n * math.pi))})
    return rows


def phase_fit(spec: OracleSpectrum, n_range) -> float:
    """Least-squares offset ``phi`` in ``E_n a_bar = n pi / 2 + phi``."""
    ns = np.asarray(list(n_range))
    for n in ns:
        _check_trusted(spec, int(n))
    y = spec.eigenvalues[ns - 1] * spec.a_bar - ns * math.pi / 2
    return float(np.mean(y))
