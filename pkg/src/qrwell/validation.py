"""Invariant suite behind ``qrwell validate``.

Each check returns ``(passed, detail)``; :func:`run_checks` collects them
without stopping at the first failure.
"""
from __future__ import annotations

import math

import numpy as np

from . import eigenfunctions as ef
from . import oracle as rr
from . import phase_shift as ps
from . import quadrature as qd
from . import spectrum as sp

MU_GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 20.0)


def check_kernel_sandwich():
    zs = np.array([0.01, 0.1, 1.0, 5.0, 20.0])
    v = qd.nu(zs)
    lo = np.exp(-zs) / (np.pi * zs ** 2)
    hi = (1 + zs) * np.exp(-zs) / (np.pi * zs ** 2)
    return bool(np.all((lo < v) & (v < hi))), f"min margin {np.min(np.minimum(v - lo, hi - v)):.3g}"


def check_theta_routes():
    worst = max(max(abs(ps.theta_value(m) - ps.theta_pv(m)), abs(ps.theta_value(m) - ps.theta_ode(m)))
                for m in MU_GRID)
    return worst < 1e-7, f"max route gap {worst:.3g}"


def check_theta_bounds():
    mus = [2.0 ** k / 16 for k in range(15)]
    vals = [ps.theta_value(m) for m in mus]
    inside = all(ps.theta_bounds(m)[0] < v < ps.theta_bounds(m)[1] for m, v in zip(mus, vals))
    mono = all(b > a for a, b in zip(vals, vals[1:]))
    return inside and mono, f"inside={inside} increasing={mono}"


def check_fig2_roots():
    got = [sp.solve_mu_tilde(1.0, n) for n in (1, 2, 3)]
    ok = all(abs(g - e) <= 1e-3 for g, e in zip(got, (1.295, 2.792, 4.342)))
    return ok, " ".join(f"{g:.6f}" for g in got)


def check_mode_residuals():
    worst = 0.0
    for a in (0.5, 1.0, 5.0, 20.0):
        for n in range(1, 31):
            mu = sp.solve_mu_tilde(a, n)
            worst = max(worst, abs(a * mu + ps.theta_value(mu) - n * math.pi / 2))
    return worst < 1e-10, f"max residual {worst:.3g}"


def check_I_mu():
    worst = 0.0
    ok = True
    for mu in (0.2, 1.0, 5.0, 20.0):
        q, c = ef.G_integral(mu)
        worst = max(worst, abs(q - c))
        ok &= max(q, c) <= min(mu / 8, 0.217 / mu)
    return ok and worst < 1e-7, f"max gap {worst:.3g}"


def check_laplace():
    worst = max(abs(ef.laplace_F(mu, xi) - ef.laplace_F_direct(mu, xi))
                for mu in (0.5, 1.0, 2.0) for xi in (0.5, 1.0, 2.0))
    return worst < 1e-6, f"max gap {worst:.3g}"


def check_complete_monotonicity():
    xs = np.linspace(0.1, 5.0, 50)
    ok = True
    for mu in (0.5, 1.0, 5.0):
        g = ef.G(mu, xs)
        d = [np.diff(g, k) for k in (1, 2, 3)]
        ok &= bool(np.all(g >= 0) and np.all(d[0] <= 0) and np.all(d[1] >= 0) and np.all(d[2] <= 0))
    return ok, "finite differences alternate" if ok else "sign pattern broken"


def check_intervals():
    ok = True
    for a in (3.0, 10.0):
        rep = sp.spectral_intervals(a, 10)
        ok &= rep.disjoint and rep.separated_from_second
    return ok, "disjoint for a_bar in {3, 10}"


def check_norm_sandwich():
    ok = True
    for a in (3.0, 10.0):
        for n in range(1, 9):
            lo, hi = ef.norm_sq_bounds(a, n)
            v = ef.phi_tilde_norm_sq(a, n)
            ok &= lo <= v <= hi
    return ok, "norm sandwich on a_bar in {3, 10}, n <= 8"


def check_oracle(n_basis):
    def run():
        msgs = []
        ok = True
        for a in (1.0, 10.0):
            s = rr.solve_cached(a, n_basis)
            E = s.eigenvalues
            for n in range(1, 9):
                lo, hi = sp.cs2_bounds(a, n)
                ok &= lo < E[n - 1] <= hi + 1e-3
            want = ["even" if n % 2 else "odd" for n in range(1, n_basis // 2 + 1)]
            ok &= list(s.parities[: n_basis // 2]) == want
            ok &= bool(np.all(np.diff(E[:10]) > 1e-6)) and bool(np.all(E > 1))
            msgs.append(f"a={a:g}: E1={E[0]:.8f}")
        s = rr.solve_cached(10.0, n_basis)
        for t in (0.5, 1.0, 2.0):
            ok &= float(np.sum(np.exp(-(s.eigenvalues[: s.trusted] - 1) * t))) <= sp.heat_trace_upper(10.0, t)
        return ok, "; ".join(msgs)
    return run


def run_checks(quick: bool = True):
    checks = [
        ("kernel_sandwich", check_kernel_sandwich),
        ("theta_triple_route", check_theta_routes),
        ("theta_bounds_monotone", check_theta_bounds),
        ("mode_roots_fig2", check_fig2_roots),
        ("mode_residuals", check_mode_residuals),
        ("I_mu_dual_route", check_I_mu),
        ("laplace_dual_route", check_laplace),
        ("G_complete_monotonicity", check_complete_monotonicity),
        ("interval_disjointness", check_intervals),
        ("norm_sandwich", check_norm_sandwich),
        ("oracle_sandwich_parity_trace", check_oracle(64 if quick else 256)),
    ]
    out = []
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
