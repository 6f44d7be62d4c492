"""Command-line front end.

Every subcommand prints a table of records. ``--output json`` wraps them as
``{"schema": 1, "command": ..., "params": ..., "data": [...]}``; ``csv`` prints
a header line followed by one row per record.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Callable, Optional

import numpy as np

from . import eigenfunctions as ef
from . import oracle as rr
from . import phase_shift as ps
from . import spectrum as sp
from .errors import ConsistencyError, ConvergenceError

SCHEMA = 1

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument helpers


def parse_range(text: str) -> list[int]:
    """``"3"``, ``"1..5"`` or ``"1,2,7"`` to a list of positive integers."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"bad index range {text!r}") from None
    if not out or min(out) < 1:
        raise UsageError(f"index range {text!r} must be nonempty and positive")
    return out


def _units_parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("well parameters (natural, physical or preset)")
    g.add_argument("--natural", type=float, metavar="A_BAR", help="dimensionless half-width m c a / hbar")
    g.add_argument("--hbar", type=float)
    g.add_argument("--c", type=float)
    g.add_argument("--m", type=float)
    g.add_argument("--a", type=float, help="half-width of the well")
    g.add_argument("--preset", choices=["electron"], help="SI constants for a named particle")
    g.add_argument("--width-pm", type=float, default=0.772, help="full well width in pm for --preset")
    return p


def _output_parent():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--output", choices=["json", "csv", "table"], default="table")
    p.add_argument("--out", metavar="PATH", help="write to file instead of stdout")
    return p


def resolve_params(args) -> tuple[float, Optional[sp.PhysicalParams]]:
    """Return ``(a_bar, physical or None)`` from exactly one parameter source."""
    phys_given = [v is not None for v in (args.hbar, args.c, args.m, args.a)]
    sources = (args.natural is not None) + any(phys_given) + (args.preset is not None)
    if sources != 1:
        raise UsageError("give exactly one of --natural, --hbar/--c/--m/--a, --preset")
    if args.natural is not None:
        if not args.natural > 0:
            raise UsageError("--natural must be positive")
        return args.natural, None
    if args.preset is not None:
        p = sp.electron_well(args.width_pm)
        return sp.to_natural(p).a_bar, p
    if not all(phys_given):
        raise UsageError("--hbar, --c, --m and --a must all be given")
    try:
        p = sp.PhysicalParams(args.hbar, args.c, args.m, args.a)
        return sp.to_natural(p).a_bar, p
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# subcommands; each returns (records, params)


def cmd_theta(args):
    rows = []
    for mu in args.mu:
        if not mu > 0:
            raise UsageError("--mu values must be positive")
        ev = ps.theta(mu)
        lo, hi = ps.theta_bounds(mu)
        rows.append({"mu": mu, "theta": ev.theta, "dtheta_dmu": ev.dtheta_dmu,
                     "lower_bound": lo, "upper_bound": hi, "method": ev.method})
    return rows, {}


def cmd_modes(args):
    a_bar, phys = resolve_params(args)
    rows = []
    for n in parse_range(args.n):
        rec = sp.mode_estimate(a_bar, n).as_dict()
        if phys is not None:
            rec["E_tilde_physical"] = sp.energy_to_physical(rec["E_tilde"], phys)
        rows.append(rec)
    return rows, {"a_bar": a_bar}


def cmd_bounds(args):
    a_bar, phys = resolve_params(args)
    p = phys or sp.PhysicalParams(1.0, 1.0, 1.0, a_bar)
    rows = []
    for n in parse_range(args.n):
        me = sp.mode_estimate(a_bar, n)
        cs1 = sp.cs1_bounds(a_bar, n)
        mlo, mhi = sp.mu_tilde_refined_bounds(a_bar, n)
        ev, eb = sp.explicit_estimate(p, n)
        _, eb2 = sp.explicit_estimate_refined(p, n)
        l2, sup, l2r = ef.eigenfunction_error_bounds(p, n)
        k = (n + 1) // 2
        par = sp.parity_upper_bounds(a_bar, k)
        rows.append({
            "n": n, "E_tilde": me.E_tilde,
            "cs1_lower": cs1[0], "cs1_upper": cs1[1],
            "cs2_lower": me.cs2_lower, "cs2_upper": me.cs2_upper,
            "mu_tilde": me.mu_tilde, "mu_lower": mlo, "mu_upper": mhi,
            "err_simple": me.err_simple, "err_refined": me.err_refined,
            "residual_norm_bound": me.residual_norm_bound,
            "parity": me.parity,
            "parity_kinetic_upper": par[0] if me.parity == "even" else par[1],
            "explicit_value": ev, "explicit_bound": eb, "explicit_bound_refined": eb2,
            "nonrelativistic": sp.nonrelativistic_limit(p, n),
            "eigfun_l2_bound": l2, "eigfun_sup_bound": sup, "eigfun_l2_refined": l2r,
        })
    return rows, {"a_bar": a_bar}


def cmd_intervals(args):
    a_bar, _ = resolve_params(args)
    rep = sp.spectral_intervals(a_bar, args.n_max)
    rows = [{"n": iv.n, "center": iv.center, "half_width": iv.half_width,
             "lower": iv.lower, "upper": iv.upper, "wide_lower": w[0], "wide_upper": w[1]}
            for iv, w in zip(rep.intervals, rep.wide_intervals)]
    return rows, {"a_bar": a_bar, "disjoint": rep.disjoint,
                  "second_level_bound": rep.second_level_bound,
                  "separated_from_second": rep.separated_from_second}


def cmd_trace(args):
    a_bar, _ = resolve_params(args)
    rows = []
    for t in args.t:
        if not t > 0:
            raise UsageError("--t values must be positive")
        rows.append({"t": t, "trace_upper": sp.heat_trace_upper(a_bar, t)})
    return rows, {"a_bar": a_bar}


def cmd_eigfun(args):
    kind = args.kind
    xs = np.linspace(args.x_min, args.x_max, args.points)
    if kind in ("F", "G"):
        if args.mu is None or not args.mu > 0:
            raise UsageError("--mu > 0 is required for F and G")
        if kind == "G":
            xs = xs[xs > 0]
            vals = ef.G(args.mu, xs)
        else:
            vals = ef.F(args.mu, xs)
        params = {"mu": args.mu, "kind": kind}
    else:
        a_bar, _ = resolve_params(args)
        ns = parse_range(args.n)
        if len(ns) != 1:
            raise UsageError("eigfun takes a single --n")
        fn = ef.phi_tilde if kind == "phi" else ef.f_n
        vals = fn(a_bar, ns[0], xs)
        params = {"a_bar": a_bar, "n": ns[0], "kind": kind}
    return [{"x": float(x), "value": float(v)} for x, v in zip(xs, vals)], params


def cmd_oracle(args):
    a_bar, _ = resolve_params(args)
    spec = rr.solve(a_bar, rr.RRConfig(n_basis=args.n_basis))
    count = min(args.count, spec.trusted)
    if args.samples is not None:
        n = args.samples
        xs = np.linspace(-a_bar, a_bar, args.points)
        vals = rr.eigenfunction_eval(spec, n, xs)
        return [{"x": float(x), "value": float(v)} for x, v in zip(xs, vals)], \
            {"a_bar": a_bar, "n_basis": spec.n_basis, "n": n}
    rows = [{"n": j + 1, "E": float(spec.eigenvalues[j]), "parity": spec.parities[j]}
            for j in range(count)]
    return rows, {"a_bar": a_bar, "n_basis": spec.n_basis,
                  "tail_error_bound": spec.tail_error_bound}


def cmd_figures(args):
    which = args.which
    if which == "theta":
        mus = np.geomspace(1e-3, 1e3, args.points)
        return [{"mu": float(m), "theta": ps.theta_value(m)} for m in mus], {"which": which}
    if which == "modes":
        a_bar = args.natural if args.natural is not None else 1.0
        mus = np.linspace(1e-3, 5.0, args.points)
        rows = []
        for m in mus:
            rec = {"mu": float(m), "theta": ps.theta_value(m)}
            for n in (1, 2, 3):
                rec[f"line_{n}"] = n * math.pi / 2 - a_bar * m
            rows.append(rec)
        return rows, {"which": which, "a_bar": a_bar,
                      "mu_tilde": [sp.solve_mu_tilde(a_bar, n) for n in (1, 2, 3)]}
    if which == "halfline":
        xs = np.linspace(0.0, 10.0, args.points)[1:]
        rows = []
        for x in xs:
            rec = {"x": float(x)}
            for mu in (0.05, 0.5, 1.0, 10.0):
                rec[f"F_{mu:g}"] = ef.F(mu, x)
                rec[f"G_{mu:g}"] = ef.G(mu, x)
            rows.append(rec)
        return rows, {"which": which}
    if which == "phitilde":
        a_bar = 1.0
        xs = np.linspace(-a_bar, a_bar, args.points)
        rows = [{"x": float(x)} for x in xs]
        for n in (1, 2, 3, 4):
            mu = sp.solve_mu_tilde(a_bar, n)
            left = ef.F(mu, a_bar + xs)
            right = -(-1) ** n * ef.F(mu, a_bar - xs)
            glued = ef.phi_tilde(a_bar, n, xs, mu=mu)
            for rec, l, r, g in zip(rows, left, right, glued):
                rec[f"left_{n}"] = float(l)
                rec[f"right_{n}"] = float(r)
                rec[f"phi_{n}"] = float(g)
        return rows, {"which": which, "a_bar": a_bar}
    if which == "intervals":
        rows = []
        for a_bar in np.linspace(0.5, 10.0, args.points):
            rec = {"a_bar": float(a_bar),
                   "second_bound_scaled": a_bar * sp.kinetic(math.pi ** 2 / a_bar ** 2)}
            try:
                rep = sp.spectral_intervals(a_bar, 8)
            except ConsistencyError:
                rows.append(rec)
                continue
            for iv, w in zip(rep.intervals, rep.wide_intervals):
                rec[f"lo_{iv.n}"] = a_bar * w[0]
                rec[f"hi_{iv.n}"] = a_bar * w[1]
            rows.append(rec)
        return rows, {"which": which}
    raise UsageError(f"unknown figure {which!r}")


def cmd_validate(args):
    from .validation import run_checks

    results = run_checks(quick=not args.full)
    rows = [{"check": name, "passed": ok, "detail": detail} for name, ok, detail in results]
    return rows, {"all_passed": all(r["passed"] for r in rows)}


# --------------------------------------------------------------------------
# rendering


def render(command: str, rows: list, params: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, "command": command, "params": params, "data": rows},
                          indent=1) + "\n"
    keys = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt_csv(r.get(k)) for k in keys})
        return buf.getvalue()
    cells = [[_fmt_table(r.get(k)) for k in keys] for r in rows]
    widths = [max([len(k)] + [len(c[i]) for c in cells]) for i, k in enumerate(keys)]
    lines = ["  ".join(k.rjust(w) for k, w in zip(keys, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    extra = [f"# {k}: {v}" for k, v in params.items()]
    return "\n".join(extra + lines) + "\n"


def _fmt_csv(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def _fmt_table(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


COMMANDS: dict[str, Callable] = {
    "theta": cmd_theta,
    "modes": cmd_modes,
    "bounds": cmd_bounds,
    "intervals": cmd_intervals,
    "trace": cmd_trace,
    "eigfun": cmd_eigfun,
    "oracle": cmd_oracle,
    "validate": cmd_validate,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    units, out = _units_parent(), _output_parent()
    parser = argparse.ArgumentParser(prog="qrwell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", parents=[out], help="phase shift; columns mu,theta,dtheta_dmu,lower_bound,upper_bound")
    p.add_argument("--mu", type=float, nargs="+", required=True)

    p = sub.add_parser("modes", parents=[units, out],
                       help="mode roots and energy estimates; one row per n with every ModeEstimate field")
    p.add_argument("--n", default="1..5", help="index range, e.g. 1..3 or 1,4")

    p = sub.add_parser("bounds", parents=[units, out],
                       help="all energy and eigenfunction bounds per n")
    p.add_argument("--n", default="1..5")

    p = sub.add_parser("intervals", parents=[units, out],
                       help="spectral intervals for n >= 3; columns n,center,half_width,lower,upper")
    p.add_argument("--n-max", type=int, default=10)

    p = sub.add_parser("trace", parents=[units, out], help="heat-trace upper bound; columns t,trace_upper")
    p.add_argument("--t", type=float, nargs="+", default=[0.5, 1.0, 2.0])

    p = sub.add_parser("eigfun", parents=[units, out],
                       help="sampled profiles; columns x,value")
    p.add_argument("--kind", choices=["F", "G", "phi", "f"], default="F")
    p.add_argument("--mu", type=float)
    p.add_argument("--n", default="1")
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser("oracle", parents=[units, out],
                       help="Rayleigh-Ritz eigenvalues; columns n,E,parity (or x,value with --samples)")
    p.add_argument("--n-basis", type=int, default=128)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--samples", type=int, metavar="N", help="emit eigenfunction N on a grid instead")
    p.add_argument("--points", type=int, default=401)

    p = sub.add_parser("validate", parents=[out], help="run the invariant suite; columns check,passed,detail")
    p.add_argument("--full", action="store_true", help="include the large-basis oracle checks")

    p = sub.add_parser("figures", parents=[out], help="figure datasets as tables")
    p.add_argument("--which", choices=["theta", "modes", "halfline", "phitilde", "intervals"], required=True)
    p.add_argument("--natural", type=float, help="a_bar for --which modes (default 1)")
    p.add_argument("--points", type=int, default=101)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        rows, params = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qrwell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"qrwell: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConsistencyError as exc:
        print(f"qrwell: consistency check failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"qrwell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(args.command, rows, params, args.output)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "validate" and not params["all_passed"]:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
