"""Trajectory simulation and discounted payoff accounting.

Simulation is the referee: every plan, however it was derived, is run
forward here under the stock dynamics X' = produce - sell, X >= 0, and
scored by its discounted profit.  Piecewise-constant stretches integrate
exactly (both the stock and the discount weight); the drawdown arc, whose
controls vary continuously, is scored by the trapezoid rule on its knots.

profit_gap compares a simulated run against the value function, charging
the horizon truncation at the plan's own stationary tail rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HorizonTooShort, InvalidParameter, OutOfDomain, StateViolation
from .problem import ValidatedProblem, validate_problem
from .strategy import CyclicPlan, DrawdownPlan, RelaxedStatic, StaticPlan
from .tableio import write_csv
from .value import ValueFunction

_X_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled run of a plan: knot times, stock, controls, running payoff.

    Controls are the rates in force on [t_k, t_{k+1}); j_running[k] is the
    discounted profit accumulated up to t_k.  tail_rate is the stationary
    undiscounted profit rate the plan would earn past the horizon.
    """

    t: np.ndarray = field(repr=False)
    stock: np.ndarray = field(repr=False)
    produce: np.ndarray = field(repr=False)
    sell: np.ndarray = field(repr=False)
    j_running: np.ndarray = field(repr=False)
    tail_rate: float
    desc: str

    @property
    def total(self) -> float:
        return float(self.j_running[-1])

    @property
    def horizon(self) -> float:
        return float(self.t[-1])


def _check_stock(x: np.ndarray, t: np.ndarray, scale: float) -> None:
    bad = np.nonzero(x < -_X_TOL * max(1.0, scale))[0]
    if len(bad):
        k = int(bad[0])
        raise StateViolation(float(t[k]), float(x[k]))


def _segment_weights(beta: float, t: np.ndarray) -> np.ndarray:
    """Exact integral of the discount factor over each [t_k, t_{k+1})."""
    e = np.exp(-beta * t)
    return (e[:-1] - e[1:]) / beta


def _const_rate_traj(beta: float, horizon: float, x0: float, a: float,
                     q: float, rate: float, desc: str,
                     tail_rate: float) -> Trajectory:
    t = np.array([0.0, horizon])
    drift = a - q
    stock = np.array([x0, x0 + drift * horizon])
    j = np.array([0.0, rate * _segment_weights(beta, t)[0]])
    _check_stock(stock, t, max(1.0, x0))
    return Trajectory(t=t, stock=stock, produce=np.array([a, a]),
                      sell=np.array([q, q]), j_running=j,
                      tail_rate=tail_rate, desc=desc)


def _simulate_cyclic(problem: ValidatedProblem, plan: CyclicPlan,
                     horizon: float, x0: float) -> Trajectory:
    beta = problem.beta
    cuts = [0.0]
    controls = []
    t = 0.0
    base = 0.0
    while t < horizon - 1e-15 * max(1.0, horizon):
        for t0, t1, a, q, rate in plan.phases:
            s0, s1 = base + t0, base + t1
            if s0 >= horizon:
                break
            end = min(s1, horizon)
            if end > cuts[-1]:
                cuts.append(end)
                controls.append((a, q, rate))
        base += plan.eps
        t = base
    tk = np.asarray(cuts)
    a_arr = np.array([c[0] for c in controls] + [controls[-1][0]])
    q_arr = np.array([c[1] for c in controls] + [controls[-1][1]])
    rates = np.array([c[2] for c in controls])
    drift = a_arr[:-1] - q_arr[:-1]
    stock = x0 + np.concatenate([[0.0], np.cumsum(drift * np.diff(tk))])
    stock = np.where(np.abs(stock - x0) < 1e-14 * max(1.0, plan.peak_stock),
                     x0, stock)
    _check_stock(stock, tk, max(1.0, plan.peak_stock))
    j = np.concatenate([[0.0], np.cumsum(rates * _segment_weights(beta, tk))])
    return Trajectory(t=tk, stock=stock, produce=a_arr, sell=q_arr,
                      j_running=j, tail_rate=plan.mean_payoff,
                      desc=plan.describe())


def _simulate_drawdown(problem: ValidatedProblem, plan: DrawdownPlan,
                       horizon: float) -> Trajectory:
    beta = problem.beta
    if horizon <= plan.tau:
        keep = plan.t_knots <= horizon
        tk = np.concatenate([plan.t_knots[keep], [horizon]])
        xk = np.concatenate([plan.x_knots[keep],
                             [float(np.interp(horizon, plan.t_knots, plan.x_knots))]])
        ak = np.concatenate([plan.a_knots[keep], [plan.a_knots[keep][-1]]])
        qk = np.concatenate([plan.q_knots[keep], [plan.q_knots[keep][-1]]])
        tail_rate = 0.0
        tail_traj = None
    else:
        tk, xk = plan.t_knots, plan.x_knots
        ak, qk = plan.a_knots, plan.q_knots
        tail_traj = simulate(problem, plan.tail, horizon=horizon - plan.tau, x0=0.0)
        tail_rate = tail_traj.tail_rate
    _check_stock(xk, tk, max(1.0, plan.x0))

    rate = problem.revenue(qk) - problem.cost(ak)
    disc = np.exp(-beta * tk) * rate
    j = np.concatenate([[0.0],
                        np.cumsum(0.5 * (disc[:-1] + disc[1:]) * np.diff(tk))])

    if tail_traj is None:
        return Trajectory(t=tk, stock=xk, produce=ak, sell=qk, j_running=j,
                          tail_rate=tail_rate, desc=plan.describe())
    shift = math.exp(-beta * plan.tau)
    t_all = np.concatenate([tk, plan.tau + tail_traj.t[1:]])
    x_all = np.concatenate([xk, tail_traj.stock[1:]])
    a_all = np.concatenate([ak[:-1], tail_traj.produce])
    q_all = np.concatenate([qk[:-1], tail_traj.sell])
    j_all = np.concatenate([j, j[-1] + shift * tail_traj.j_running[1:]])
    return Trajectory(t=t_all, stock=x_all, produce=a_all, sell=q_all,
                      j_running=j_all, tail_rate=tail_rate,
                      desc=plan.describe())


def _simulate_generic(problem: ValidatedProblem, plan, horizon: float,
                      x0: float, dt: float) -> Trajectory:
    """Left-endpoint Euler for any object exposing controls_at(t)."""
    beta = problem.beta
    n = max(int(math.ceil(horizon / dt)), 1)
    tk = np.linspace(0.0, horizon, n + 1)
    ak = np.empty(n + 1)
    qk = np.empty(n + 1)
    for i, t in enumerate(tk):
        ak[i], qk[i] = plan.controls_at(float(t))
    stock = x0 + np.concatenate([[0.0], np.cumsum((ak[:-1] - qk[:-1]) * np.diff(tk))])
    _check_stock(stock, tk, max(1.0, float(np.abs(stock).max())))
    rates = problem.revenue(qk[:-1]) - problem.cost(ak[:-1])
    j = np.concatenate([[0.0], np.cumsum(rates * _segment_weights(beta, tk))])
    return Trajectory(t=tk, stock=stock, produce=ak, sell=qk, j_running=j,
                      tail_rate=float(rates[-1]), desc=f"generic {plan!r}")


def simulate(problem, plan, *, horizon: float, x0: float | None = None,
             dt: float | None = None) -> Trajectory:
    """Run a plan for the given horizon and account its discounted profit.

    x0 defaults to the plan's own initial stock (drawdown) or zero.  The
    stock path is checked against the non-negativity constraint and a
    StateViolation pinpoints the first breach.
    """
    problem = validate_problem(problem)
    if horizon <= 0.0:
        raise InvalidParameter("horizon must be positive")
    beta = problem.beta

    if isinstance(plan, DrawdownPlan):
        if x0 is not None and abs(x0 - plan.x0) > 1e-12 * max(1.0, plan.x0):
            raise InvalidParameter(
                f"plan starts at {plan.x0}, simulation asked for {x0}")
        return _simulate_drawdown(problem, plan, horizon)

    x0 = 0.0 if x0 is None else float(x0)
    if x0 < 0.0:
        raise OutOfDomain("initial stock must be non-negative")

    if isinstance(plan, StaticPlan):
        u = plan.u
        if not (problem.demand_set.contains(u) and problem.production_set.contains(u)):
            raise InvalidParameter(f"static rate {u} leaves Q or A")
        rate = float(problem.revenue(u) - problem.cost(u))
        return _const_rate_traj(beta, horizon, x0, u, u, rate,
                                plan.describe(), rate)

    if isinstance(plan, RelaxedStatic):
        a_mean = plan.nu * plan.a1 + (1.0 - plan.nu) * plan.a2
        q_mean = plan.gamma * plan.q1 + (1.0 - plan.gamma) * plan.q2
        return _const_rate_traj(beta, horizon, x0, a_mean, q_mean,
                                plan.payoff, plan.describe() + " (mean rates)",
                                plan.payoff)

    if isinstance(plan, CyclicPlan):
        return _simulate_cyclic(problem, plan, horizon, x0)

    if hasattr(plan, "controls_at"):
        if dt is None:
            dt = horizon / 1024.0
        return _simulate_generic(problem, plan, horizon, x0, float(dt))
    raise InvalidParameter(f"cannot simulate {type(plan).__name__}")


def profit_gap(traj: Trajectory, vf: ValueFunction, tol_tail: float = 1e-3) -> float:
    """Relative shortfall of a simulated run against the value function.

    The continuation past the horizon is charged at the plan's stationary
    tail rate; if discounting has not yet made the continuation smaller
    than tol_tail, the horizon is declared too short instead of guessing.
    """
    beta = vf.beta
    horizon = traj.horizon
    x0 = float(traj.stock[0])
    v_opt = vf.value_at(x0)
    scale = max(1.0, abs(v_opt))
    leftover = math.exp(-beta * horizon) * max(abs(vf.v_flat), abs(traj.tail_rate) / beta)
    if leftover > tol_tail * scale:
        raise HorizonTooShort(
            f"discounted continuation {leftover:.3g} still exceeds "
            f"{tol_tail:.3g} at horizon {horizon}")
    realized = traj.total + math.exp(-beta * horizon) * traj.tail_rate / beta
    return (v_opt - realized) / scale


def write_trajectory_csv(traj: Trajectory, path) -> None:
    write_csv(path, ["t", "stock", "produce", "sell", "j_running"],
              [traj.t, traj.stock, traj.produce, traj.sell, traj.j_running])
