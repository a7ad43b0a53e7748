"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

import numpy as np

from .checks import format_report, run_checks
from .dynamics import AdjustmentConfig, simulate
from .equilibrium import (closed_form_equilibrium, best_response, iso_profit_points, solve_newton)
from .errors import InvalidInput, ModelError
from .extended import extended_jacobian, extended_statics_cbarL, solve_extended
from .model import aggregate_surplus
from .policy import dGE_dcbarL, optimize_guidance
from .scenario import Scenario, load_scenario
from .statics import canonical_param, nonspecific_statics, specific_statics

SOLVE_COLUMNS = ["p_UE", "p_LE", "X_UE", "X_LE", "pi_UE", "pi_LE", "theta_star", "theta_star_star",
                 "CS_agg", "conditions_ok"]
POLICY_COLUMNS = ["G_E", "W_E", "boundary"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_rows(fh, header: Sequence[str], rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def _require_specific(sc: Scenario, what: str):
    if sc.kind != "specific":
        raise InvalidInput(f"{what} needs the specific demand model (scenario has {sc.kind})")


def solve_row(sc: Scenario) -> List:
    if sc.kind == "specific":
        eq = closed_form_equilibrium(sc.prims, sc.funcs)
        c = eq.conditions
        cs = aggregate_surplus(sc.prims, sc.funcs, eq.prices).value
        return [eq.p_UE, eq.p_LE, eq.X_UE, eq.X_LE, eq.pi_UE, eq.pi_LE,
                c.theta_star, c.theta_star_star, cs, c.all_hold]
    eq = solve_newton(sc.system())
    return [eq.p_UE, eq.p_LE, eq.X_UE, eq.X_LE, eq.pi_UE, eq.pi_LE, None, None, None, None]


def _warn_conditions(sc: Scenario, err):
    if sc.kind == "specific":
        c = closed_form_equilibrium(sc.prims, sc.funcs).conditions
        if not c.all_hold:
            print(f"warning: {', '.join(c.failed())} violated at the equilibrium", file=err)


def cmd_solve(sc, args, out, err):
    _warn_conditions(sc, err)
    write_rows(out, SOLVE_COLUMNS, [solve_row(sc)])
    return 0


def cmd_statics(sc, args, out, err):
    param = canonical_param(args.param)
    if sc.kind == "specific":
        rep = specific_statics(sc.prims, sc.funcs, param)
        rows = []
        for k, a, f in rep.rows():
            rows.append([k, a, f, None if a is None else abs(a - f), k in rep.indeterminate])
        write_rows(out, ["quantity", "analytic", "fd", "abs_err", "sign_indeterminate"], rows)
        for v in rep.verdicts:
            print(f"{'PASS' if v.passed else 'FAIL'} {v.claim}: found {v.found}", file=err)
        return 0
    eq = solve_newton(sc.system())
    g = nonspecific_statics(sc.system(), eq, param)
    write_rows(out, ["quantity", "full", "approx", "detJ"],
               [["p_UE", g.full[0], g.approx[0], g.detJ], ["p_LE", g.full[1], g.approx[1], g.detJ]])
    print(f"branch: {g.branch}", file=err)
    return 0


def _pair(text: str):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise InvalidInput(f"expected two comma-separated numbers, got {text!r}") from None
    return a, b


def cmd_dynamics(sc, args, out, err):
    d = sc.dynamics
    dt = args.dt if args.dt is not None else d.dt
    horizon = args.steps * dt if args.steps is not None else d.horizon
    init = _pair(args.p0) if args.p0 else None
    cfg = AdjustmentConfig(d.kU if args.kU is None else args.kU, d.kL if args.kL is None else args.kL,
                           dt, horizon, init)
    tr = simulate(sc.system(), cfg)
    tr.write_csv(out)
    if tr.diagnostic:
        raise ModelError(tr.diagnostic)
    if not tr.converged:
        print(f"note: horizon reached, distance to Nash {tr.final_distance:.3g}", file=err)
    return 0


def cmd_policy(sc, args, out, err):
    _require_specific(sc, "policy")
    o = optimize_guidance(sc.prims, sc.funcs, args.gmax)
    s = dGE_dcbarL(sc.prims, sc.funcs, args.gmax)
    d = o.decomposition
    write_rows(out, ["G_E", "W_E", "foc_residual", "rho", "boundary", "multimodal", "price_channel", "cost_cut",
                     "probability", "dGE_dcL", "dGE_dcL_reopt"],
               [[o.G_E, o.W_E, o.foc_residual, o.rho, o.boundary or "", o.multimodal, d.price_channel,
                 d.cost_cut, d.probability, s.value, s.fd_value]])
    if o.boundary:
        print(f"warning: optimum on the {o.boundary} bound of [0, {args.gmax:g}]", file=err)
    if o.multimodal:
        print(f"warning: several local maxima at G = {', '.join(f'{r:.6g}' for r in o.roots)}", file=err)
    return 0


def cmd_extended(sc, args, out, err):
    _require_specific(sc, "extended")
    eq = solve_extended(sc.prims, sc.funcs)
    jac = extended_jacobian(sc.prims, sc.funcs, eq)
    st = extended_statics_cbarL(sc.prims, sc.funcs)
    write_rows(out, ["R_E", "p_UE", "p_LE", "X_UE", "X_LE", "pi_UE", "pi_LE", "detJ3", "det_raw", "soc",
                     "dpU_dcL", "dpL_dcL", "dR_dcL", "dpU_dcL_fd", "dpL_dcL_fd", "dR_dcL_fd", "sign_case"],
               [[eq.R_E, eq.p_UE, eq.p_LE, eq.X_UE, eq.X_LE, eq.pi_UE, eq.pi_LE, eq.detJ3, jac.det_raw,
                 eq.soc_value, *st.triple, *st.triple_fd, st.sign_case]])
    return 0


def sweep_point(sc: Scenario, param: str, value: float, gmax: float) -> List:
    point = sc.replace(prims=sc.prims.replace(**{param: value}))
    row = [value] + solve_row(point)
    if sc.kind == "specific":
        o = optimize_guidance(point.prims, point.funcs, gmax)
        row += [o.G_E, o.W_E, o.boundary or ""]
    else:
        row += [None, None, None]
    return row


SWEEP_PARAMS = ("q", "c_bar", "c_bar_L", "R", "G")


def cmd_sweep(sc, args, out, err):
    param = "c_bar_L" if args.param == "cL" else args.param
    if param not in SWEEP_PARAMS:
        raise InvalidInput(f"--param must be one of {', '.join(SWEEP_PARAMS)}")
    if args.steps < 1:
        raise InvalidInput("--steps must be >= 1")
    values = [args.start] if args.steps == 1 else [float(v) for v in np.linspace(args.start, args.stop, args.steps)]
    n = len(values)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            rows = list(ex.map(sweep_point, [sc] * n, [param] * n, values, [args.gmax] * n))
    else:
        rows = [sweep_point(sc, param, v, args.gmax) for v in values]
    write_rows(out, [param] + SOLVE_COLUMNS + POLICY_COLUMNS, rows)
    return 0


def cmd_curves(sc, args, out, err):
    sys_ = sc.system()
    eq = closed_form_equilibrium(sc.prims, sc.funcs) if sc.kind == "specific" else solve_newton(sys_)
    eU, eL = eq.prices
    span = args.span
    rows = []
    for r in np.linspace(eL - span, eL + span, args.points):
        rows.append(["reaction_U", best_response(sys_, 0, float(r)), float(r)])
    for r in np.linspace(eU - span, eU + span, args.points):
        rows.append(["reaction_L", float(r), best_response(sys_, 1, float(r))])
    j = 0 if args.producer == "U" else 1
    own = eq.prices[j]
    levels = [float(x) for x in args.levels.split(",")] if args.levels else [(eq.pi_UE, eq.pi_LE)[j]]
    for lv in levels:
        curve = iso_profit_points(sys_, args.producer, lv, np.linspace(own - span, own + span, args.points))
        name = f"iso_{args.producer}_{lv:.6g}"
        for pt in curve.points:
            x, y = (pt.x, pt.y) if j == 0 else (pt.y, pt.x)
            rows.append([name, x, y])
        if curve.skipped:
            print(f"note: {name} unreachable at {len(curve.skipped)} grid points", file=err)
    # x is always p^U and y is p^L
    write_rows(out, ["series", "x", "y"], rows)
    return 0


def cmd_check(sc, args, out, err):
    results = run_checks(sc, seed=args.seed, trials=args.trials)
    out.write(format_report(sc, results))
    return 0 if all(r.passed or r.info for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bertrand-lab", description="Two-producer export model laboratory.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="scenario file")
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.set_defaults(func=fn)
        return p

    add("solve", cmd_solve, "equilibrium prices, demands, profits and surplus")
    p = add("statics", cmd_statics, "comparative statics, analytic vs finite differences")
    p.add_argument("--param", required=True, choices=["cL", "c_bar_L", "R", "G"])
    p = add("dynamics", cmd_dynamics, "price adjustment path and Liapunov values")
    p.add_argument("--p0", help="initial prices as U,L")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--kU", type=float)
    p.add_argument("--kL", type=float)
    p = add("policy", cmd_policy, "optimal guidance level G_E")
    p.add_argument("--gmax", type=float, default=50.0)
    add("extended", cmd_extended, "equilibrium with endogenous added value R")
    p = add("sweep", cmd_sweep, "solve and optimize over a parameter grid")
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--gmax", type=float, default=50.0)
    p.add_argument("--jobs", type=int, default=1)
    p = add("curves", cmd_curves, "reaction and iso-profit curve data")
    p.add_argument("--producer", choices=["U", "L"], default="U")
    p.add_argument("--levels", help="comma-separated profit levels (default: equilibrium profit)")
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--span", type=float, default=0.2)
    p = add("check", cmd_check, "full verification report")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=20)
    return ap


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        sc = load_scenario(args.scenario)
        buf = io.StringIO()
        code = args.func(sc, args, buf, err)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(buf.getvalue())
        else:
            out.write(buf.getvalue())
        return code
    except InvalidInput as exc:
        print(f"error: {exc}", file=err)
        return 2
    except ModelError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=err)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 2


if __name__ == "__main__":
    with contextlib.suppress(BrokenPipeError):
        sys.exit(main())
