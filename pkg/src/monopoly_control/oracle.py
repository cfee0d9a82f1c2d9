"""Brute-force discrete-time dynamic-programming cross-check.

Nothing here touches envelopes, conjugates, or slope grids: the oracle
discretizes time, stock, and both control sets, then runs plain value
iteration on

    v(x) = max_{a, q}  (R(q) - C(a)) k  +  gamma v(x + (a - q) dt),
    k = (1 - e^(-beta dt)) / beta,   gamma = e^(-beta dt),

subject to x + (a - q) dt >= 0, with stock clamped at the top of the grid
(extra stock is worthless there, so the clamp only understates).  The max
separates through the post-sales level y = x - q dt, so each sweep is two
one-dimensional maximizations instead of a joint one.

An unbounded production set is capped independently of the main solver:
no rational producer exceeds argmax_a { s a - C(a) } where s is the best
average revenue max_q R(q)/q, because stock can never be worth more than
s per unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NotConverged
from .problem import ValidatedProblem, validate_problem
from .tableio import write_csv

_BIG_NEG = -1e30


@dataclass(frozen=True, eq=False)
class DPResult:
    """Converged value-iteration table with greedy policies."""

    x_grid: np.ndarray = field(repr=False)
    v_hat: np.ndarray = field(repr=False)
    policy_produce: np.ndarray = field(repr=False)
    policy_sell: np.ndarray = field(repr=False)
    beta: float
    dt: float
    iterations: int
    sup_change: float
    fix_gap: float

    def value_at(self, x):
        out = np.interp(x, self.x_grid, self.v_hat)
        return float(out) if np.ndim(x) == 0 else out

    @property
    def x_max(self) -> float:
        return float(self.x_grid[-1])


def production_cap(problem: ValidatedProblem) -> float:
    """Largest production rate any shadow price can justify."""
    q = problem.q_grid
    pos = q[q > 0.0]
    if not len(pos):
        return 1.0
    s = float(np.max(problem.revenue(pos) / pos))
    if s <= 0.0:
        return float(pos[-1])
    hi = 4.0 * (float(q[-1]) + 1.0)
    for _ in range(60):
        a = np.linspace(0.0, hi, 4097)
        k = int(np.argmax(s * a - problem.cost(a)))
        if a[k] < 0.9 * hi:
            return max(float(a[k]), float(q[-1])) * 1.05 + 1e-9
        hi *= 2.0
    raise InvalidParameter("production payoff keeps improving; cost fails "
                           "to outgrow revenue on any probed range")


def _control_grid(cset, n: int, cap: float | None) -> np.ndarray:
    if cset.kind == "finite":
        return np.asarray(cset.values, dtype=float)
    hi = cset.hi if cset.is_bounded else cap
    return np.linspace(cset.lo, hi, n)


def dp_value(problem, *, x_max: float, nx: int = 512, dt: float = 0.002,
             tol_fix: float = 1e-9, na: int = 65, nq: int = 65,
             max_iter: int = 200_000) -> DPResult:
    """Value iteration on the discretized problem.

    Per-step rates use the exact discount weight for a constant rate, so
    the only discretization errors are the control/stock grids and the
    piecewise-constant-in-dt policy class.  Sweeps stop once the
    contraction sandwich (see below) certifies the corrected table within
    tol_fix of the discretized fixed point, which happens far earlier
    than a raw sup-change test would allow.
    """
    problem = validate_problem(problem)
    beta = problem.beta
    if x_max <= 0.0 or nx < 8:
        raise InvalidParameter("stock grid must be positive with nx >= 8")
    if dt <= 0.0:
        raise InvalidParameter("time step must be positive")

    cap = None
    if problem.a_grid is None:
        cap = production_cap(problem)
    a_grid = _control_grid(problem.production_set, na, cap)
    q_grid = _control_grid(problem.demand_set, nq, None)
    h = x_max / (nx - 1)
    if dt * (float(a_grid[-1]) + float(q_grid[-1])) > 8.0 * h * max(nx, 1):
        raise InvalidParameter("time step moves stock across the whole grid; "
                               "refine dt or widen the grid")

    x_grid = np.linspace(0.0, x_max, nx)
    pad = int(math.ceil(float(q_grid[-1]) * dt / h)) + 1
    y_grid = np.concatenate([x_grid[0] - h * np.arange(pad, 0, -1), x_grid])

    k = (1.0 - math.exp(-beta * dt)) / beta
    gamma = math.exp(-beta * dt)
    r_gain = np.asarray(problem.revenue(q_grid), dtype=float) * k
    c_pay = np.asarray(problem.cost(a_grid), dtype=float) * k

    # stage 1 (production): v at clip(y + a dt) for every (a, y)
    tgt = y_grid[None, :] + a_grid[:, None] * dt
    feas = tgt >= -1e-12
    pos = np.clip(tgt, 0.0, x_max) / h
    ilo = np.clip(pos.astype(np.intp), 0, nx - 2)
    w1 = pos - ilo

    # stage 2 (sales): u at x - q dt for every (q, x)
    pts = x_grid[None, :] - q_grid[:, None] * dt
    pos2 = (pts - y_grid[0]) / h
    jlo = np.clip(pos2.astype(np.intp), 0, len(y_grid) - 2)
    w2 = np.clip(pos2 - jlo, 0.0, 1.0)

    # contraction sandwich: after any sweep with increment delta, the
    # fixed point lies between v + g*min(delta) and v + g*max(delta),
    # g = gamma/(1-gamma).  The width shrinks at the rate of the gap
    # between delta components, far faster than delta itself, so this
    # both terminates early and certifies the result.
    g = gamma / (1.0 - gamma)
    v = np.zeros(nx)
    sup = math.inf
    fix_gap = math.inf
    it = 0
    delta = v
    for it in range(1, max_iter + 1):
        vi = v[ilo] * (1.0 - w1) + v[ilo + 1] * w1
        cand1 = np.where(feas, -c_pay[:, None] + gamma * vi, _BIG_NEG)
        u = cand1.max(axis=0)
        ui = u[jlo] * (1.0 - w2) + u[jlo + 1] * w2
        v_new = (r_gain[:, None] + ui).max(axis=0)
        delta = v_new - v
        sup = float(np.abs(delta).max())
        v = v_new
        fix_gap = g * 0.5 * (float(delta.max()) - float(delta.min()))
        if fix_gap < tol_fix:
            break
    else:
        raise NotConverged(f"value iteration stalled with certified gap "
                           f"{fix_gap:.3g} after {max_iter} sweeps")

    v = v + g * 0.5 * (float(delta.min()) + float(delta.max()))

    vi = v[ilo] * (1.0 - w1) + v[ilo + 1] * w1
    cand1 = np.where(feas, -c_pay[:, None] + gamma * vi, _BIG_NEG)
    u = cand1.max(axis=0)
    a_star_y = a_grid[cand1.argmax(axis=0)]
    ui = u[jlo] * (1.0 - w2) + u[jlo + 1] * w2
    cand2 = r_gain[:, None] + ui
    q_idx = cand2.argmax(axis=0)
    q_star = q_grid[q_idx]
    y_star = x_grid - q_star * dt
    a_star = np.interp(y_star, y_grid, a_star_y)

    return DPResult(x_grid=x_grid, v_hat=v, policy_produce=a_star,
                    policy_sell=q_star, beta=beta, dt=dt, iterations=it,
                    sup_change=sup, fix_gap=fix_gap)


def brute_conjugate(xs, fs, z: float, kind: str) -> tuple:
    """Exhaustive conjugate over raw samples; the envelope module's rival.

    kind 'cost' maximizes x z - f, 'revenue' maximizes f - x z.  Returns
    (value, argmax).
    """
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if kind == "cost":
        vals = xs * z - fs
    elif kind == "revenue":
        vals = fs - xs * z
    else:
        raise InvalidParameter("kind must be 'cost' or 'revenue'")
    k = int(np.argmax(vals))
    return float(vals[k]), float(xs[k])


def write_dp_csv(res: DPResult, path) -> None:
    write_csv(path, ["x", "v_hat", "produce", "sell"],
              [res.x_grid, res.v_hat, res.policy_produce, res.policy_sell])
