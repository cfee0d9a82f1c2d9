"""Command-line front end.

Subcommands take a problem config (see the config module for the schema)
and write plain CSV / key=value artifacts into --out:

    solve      value.csv + summary.txt (zeta, v(0), static verdict, ...)
    value      value.csv only
    strategy   strategy.txt; with --x0 also drawdown.csv
    simulate   trajectory.csv + simulate_summary.txt
    oracle     dp.csv from the discrete-time cross-check
    compare    compare.txt with max |dp - v| and realized profit gaps

Everything numeric is written with 17 significant digits, so identical
configs give byte-identical outputs.  Exit codes: 0 success, 2 rejected
input (config or assumption violations), 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import load_problem
from .errors import (
    AssumptionViolation,
    HorizonTooShort,
    InvalidParameter,
    MonopolyControlError,
)
from .hamiltonian import build_hamiltonian
from .oracle import dp_value, write_dp_csv
from .problem import validate_problem
from .simulate import profit_gap, simulate, write_trajectory_csv
from .strategy import (
    StaticPlan,
    convexified_static,
    cyclic_strategy,
    drawdown_plan,
    relaxed_static,
    static_optimality_test,
)
from .tableio import write_csv, write_keyvalues
from .value import build_value, write_value_csv


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", help="problem config file")
    common.add_argument("--config", dest="config_flag", metavar="PATH",
                        help="problem config file (alternative to positional)")
    common.add_argument("--out", default=".", metavar="DIR",
                        help="output directory (default: current)")
    common.add_argument("--set", action="append", default=[],
                        metavar="SECTION.KEY=VALUE",
                        help="override a config entry; repeatable")
    common.add_argument("--grid-n", type=int, metavar="N",
                        help="shorthand for --set problem.grid_n=N")

    p = argparse.ArgumentParser(
        prog="monopoly-control",
        description="production-pricing control solver")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("solve", parents=[common],
                   help="value function, summary, static verdict")
    sub.add_parser("value", parents=[common], help="value.csv only")

    ps = sub.add_parser("strategy", parents=[common],
                        help="stationary plans; --x0 adds a drawdown path")
    ps.add_argument("--x0", type=float, default=None,
                    help="initial stock for the drawdown plan")
    ps.add_argument("--eps", type=float, default=None,
                    help="cycle period for the cyclic plan")

    pm = sub.add_parser("simulate", parents=[common],
                        help="integrate the optimal plan from --x0")
    pm.add_argument("--x0", type=float, default=0.0)
    pm.add_argument("--eps", type=float, default=None,
                    help="force a cyclic tail with this period")
    pm.add_argument("--horizon", type=float, default=None,
                    help="simulation length (default 16/beta)")

    po = sub.add_parser("oracle", parents=[common],
                        help="discrete-time value iteration")
    po.add_argument("--x0", type=float, default=0.5, metavar="X_MAX",
                    help="top of the stock grid (default 0.5)")
    po.add_argument("--dt", type=float, default=0.002)

    pc = sub.add_parser("compare", parents=[common],
                        help="cross-check solver against the oracle")
    pc.add_argument("--x0", type=float, default=0.5, metavar="X_MAX",
                    help="top of the oracle stock grid (default 0.5)")
    pc.add_argument("--dt", type=float, default=0.002)
    pc.add_argument("--horizon", type=float, default=None)
    pc.add_argument("--eps", type=float, default=None)
    return p


def _load(args):
    path = args.config_flag or args.config
    if not path:
        raise InvalidParameter("no config file given")
    overrides = list(args.set)
    if args.grid_n is not None:
        overrides.append(f"problem.grid_n={args.grid_n}")
    return validate_problem(load_problem(path, overrides))


def _regime(problem, report) -> str | None:
    """Classify cubic-cost / linear-demand instances by solver verdicts."""
    if (problem.cost.family != "cubic"
            or problem.revenue.family != "linear_demand"):
        return None
    if not report.optimal:
        return "ii"
    return "i" if report.u_hat <= 1e-9 else "iii"


def _stationary(problem, model):
    report = static_optimality_test(problem, model)
    u_tilde, relaxed_payoff = convexified_static(problem, model)
    return report, u_tilde, relaxed_payoff


def _cmd_solve(args) -> int:
    problem = _load(args)
    out = Path(args.out)
    model = build_hamiltonian(problem)
    vf = build_value(model)
    write_value_csv(vf, out / "value.csv")
    report, u_tilde, relaxed_payoff = _stationary(problem, model)
    items = [
        ("zeta", model.zeta),
        ("v0", vf.value_at(0.0)),
        ("v_flat", vf.v_flat),
        ("h_min", model.h_min),
        ("m_lo", model.m_lo),
        ("m_hi", model.m_hi),
        ("z_max", model.z_max),
        ("static_optimal", report.optimal),
        ("u_static", report.u_hat),
        ("static_payoff", report.payoff),
        ("static_gap", report.gap),
        ("u_tilde", u_tilde),
        ("relaxed_payoff", relaxed_payoff),
    ]
    if model.trunc_bound is not None:
        items.append(("production_ceiling", model.trunc_bound))
    regime = _regime(problem, report)
    if regime is not None:
        items.append(("regime", regime))
    write_keyvalues(out / "summary.txt", items)
    print(f"zeta = {model.zeta:.10g}, v(0) = {vf.value_at(0.0):.10g}, "
          f"static_optimal = {report.optimal}")
    return 0


def _cmd_value(args) -> int:
    problem = _load(args)
    model = build_hamiltonian(problem)
    vf = build_value(model)
    write_value_csv(vf, Path(args.out) / "value.csv")
    print(f"value.csv written, zeta = {model.zeta:.10g}")
    return 0


def _cmd_strategy(args) -> int:
    problem = _load(args)
    out = Path(args.out)
    model = build_hamiltonian(problem)
    report, u_tilde, relaxed_payoff = _stationary(problem, model)
    lines = [
        f"static: {StaticPlan(report.u_hat).describe()} "
        f"payoff={report.payoff:.10g} optimal={report.optimal} "
        f"gap={report.gap:.10g}",
    ]
    relaxed = relaxed_static(problem, model, u_tilde)
    lines.append(f"relaxed: {relaxed.describe()} payoff={relaxed.payoff:.10g}")
    eps = args.eps if args.eps is not None else (1.0 / problem.beta) / 64.0
    cyc = cyclic_strategy(problem, relaxed, eps)
    lines.append(f"cyclic: {cyc.describe()}")
    if args.x0 is not None:
        vf = build_value(model)
        plan = drawdown_plan(problem, vf, model, args.x0, eps=args.eps)
        lines.append(f"drawdown: {plan.describe()}")
        if hasattr(plan, "t_knots"):
            write_csv(out / "drawdown.csv",
                      ["t", "stock", "produce", "sell"],
                      [plan.t_knots, plan.x_knots,
                       plan.a_knots, plan.q_knots])
    (out / "strategy.txt").write_text("\n".join(lines) + "\n",
                                      encoding="ascii")
    print("\n".join(lines))
    return 0


def _cmd_simulate(args) -> int:
    problem = _load(args)
    out = Path(args.out)
    model = build_hamiltonian(problem)
    vf = build_value(model)
    tail = "auto" if args.eps is None else "cyclic"
    plan = drawdown_plan(problem, vf, model, args.x0, tail=tail, eps=args.eps)
    horizon = args.horizon if args.horizon is not None else 16.0 / problem.beta
    traj = simulate(problem, plan, horizon=horizon, x0=args.x0)
    write_trajectory_csv(traj, out / "trajectory.csv")
    items = [
        ("x0", float(args.x0)),
        ("horizon", float(horizon)),
        ("plan", plan.describe() if hasattr(plan, "describe") else str(plan)),
        ("discounted_total", traj.total),
        ("tail_rate", traj.tail_rate),
        ("value_x0", vf.value_at(args.x0)),
    ]
    try:
        items.append(("profit_gap", profit_gap(traj, vf)))
    except HorizonTooShort:
        items.append(("horizon_too_short", True))
    write_keyvalues(out / "simulate_summary.txt", items)
    print(f"trajectory.csv written, discounted total = {traj.total:.10g}")
    return 0


def _cmd_oracle(args) -> int:
    problem = _load(args)
    res = dp_value(problem, x_max=args.x0, dt=args.dt)
    write_dp_csv(res, Path(args.out) / "dp.csv")
    print(f"dp.csv written, {res.iterations} sweeps, "
          f"v_hat(0) = {res.value_at(0.0):.10g}")
    return 0


def _cmd_compare(args) -> int:
    problem = _load(args)
    out = Path(args.out)
    model = build_hamiltonian(problem)
    vf = build_value(model)
    res = dp_value(problem, x_max=args.x0, dt=args.dt)
    lo_half = res.x_grid <= 0.5 * args.x0 + 1e-12
    xs = res.x_grid[lo_half]
    gap_grid = np.abs(res.v_hat[lo_half]
                      - np.array([vf.value_at(x) for x in xs]))
    k = int(np.argmax(gap_grid))
    horizon = args.horizon if args.horizon is not None else 24.0 / problem.beta
    items = [
        ("max_value_gap", float(gap_grid.max())),
        ("argmax_x", float(xs[k])),
        ("dp_iterations", res.iterations),
        ("dp_fix_gap", res.fix_gap),
    ]
    x_mid = 0.5 * args.x0
    tail = "auto" if args.eps is None else "cyclic"
    plan = drawdown_plan(problem, vf, model, x_mid, tail=tail, eps=args.eps)
    traj = simulate(problem, plan, horizon=horizon, x0=x_mid)
    items.append(("profit_gap_drawdown", profit_gap(traj, vf)))
    report = static_optimality_test(problem, model)
    if report.optimal:
        tstat = simulate(problem, StaticPlan(report.u_hat), horizon=horizon)
        items.append(("profit_gap_static", profit_gap(tstat, vf)))
    write_keyvalues(out / "compare.txt", items)
    print(f"max |v_hat - v| = {gap_grid.max():.3e} on [0, {xs[-1]:.3g}]")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "value": _cmd_value,
    "strategy": _cmd_strategy,
    "simulate": _cmd_simulate,
    "oracle": _cmd_oracle,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (AssumptionViolation, InvalidParameter) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MonopolyControlError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
