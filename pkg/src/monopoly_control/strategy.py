"""Stationary, relaxed, cyclic, and stock-drawdown strategies.

The static question: is there a single rate u in Q intersect A with
R(u) - C(u) = min H?  If yes, produce and sell at u forever (once stock is
gone) and nothing beats it.  If no, the gap is closed by mixing two sales
rates and two production rates with matching means (the relaxed optimum),
realized physically by fast production/sales cycles whose payoff comes
within order epsilon of the bound while stock stays non-negative.

Positive initial stock is drawn down along the feedback rule first: the
marginal value of stock rises exponentially at the discount rate along an
optimal path, so time parametrizes the slope directly and no root finding
is needed along the trajectory.

arvan_moses_reference and linear_cost_reference carry the closed-form
answers for the two built-in families; the solver never reads them, they
exist to be disagreed with.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .envelope import Envelope, contact_argmax_intervals, hull_decompose
from .errors import DecompositionMismatch, InvalidParameter, OutOfDomain, ZetaZeroWarning
from .hamiltonian import HamiltonianModel, controls_at as _h_controls
from .problem import ValidatedProblem, validate_problem
from .value import ValueFunction


@dataclass(frozen=True)
class StaticPlan:
    """Produce and sell at the constant rate u."""
    u: float

    def describe(self) -> str:
        return f"static u={self.u:.10g}"


@dataclass(frozen=True)
class StaticReport:
    """Verdict on whether a static plan attains the stationary optimum."""
    optimal: bool
    u_hat: float
    payoff: float
    gap: float
    witness: float | None


@dataclass(frozen=True)
class RelaxedStatic:
    """Two-point mixtures on sales and production with equal means.

    gamma weighs q1, nu weighs a1; payoff is the mixed running profit,
    which matches min H when u_tilde maximizes the convexified profit.
    """
    u_tilde: float
    q1: float
    q2: float
    gamma: float
    a1: float
    a2: float
    nu: float
    payoff: float

    @property
    def sales_mixed(self) -> bool:
        return self.q1 != self.q2

    @property
    def production_mixed(self) -> bool:
        return self.a1 != self.a2

    def describe(self) -> str:
        return (f"relaxed u~={self.u_tilde:.10g} "
                f"q=({self.q1:.10g},{self.q2:.10g};{self.gamma:.10g}) "
                f"a=({self.a1:.10g},{self.a2:.10g};{self.nu:.10g})")


@dataclass(frozen=True, eq=False)
class CyclicPlan:
    """Periodic realization of a relaxed optimum with period eps.

    phases are (t_start, t_end, produce, sell, payoff_rate) tuples covering
    one period; stock starts and ends each period at zero and peaks at
    peak_stock = kappa-ish fraction into the cycle.  mean_payoff is the
    time average over a period and equals the relaxed payoff.
    """
    eps: float
    u_tilde: float
    phases: tuple
    kappa: float
    peak_stock: float
    mean_payoff: float

    def controls_at(self, t: float) -> tuple:
        s = math.fmod(float(t), self.eps)
        for t0, t1, a, q, _ in self.phases:
            if t0 <= s < t1:
                return (a, q)
        return (self.phases[-1][2], self.phases[-1][3])

    def describe(self) -> str:
        return (f"cyclic eps={self.eps:.10g} kappa={self.kappa:.10g} "
                f"peak={self.peak_stock:.10g}")


@dataclass(frozen=True, eq=False)
class DrawdownPlan:
    """Feedback drawdown of initial stock, then a stationary tail.

    Along the optimal path the marginal value of stock obeys
    xi(t) = v'(x0) e^(beta t) until it reaches zeta at time tau; stock,
    production, and sales at the tabulated knots realize that slope path.
    After tau the plan hands over to tail (static, relaxed, or cyclic).
    """
    x0: float
    tau: float
    t_knots: np.ndarray = field(repr=False)
    x_knots: np.ndarray = field(repr=False)
    a_knots: np.ndarray = field(repr=False)
    q_knots: np.ndarray = field(repr=False)
    tail: object
    _model: HamiltonianModel = field(repr=False)
    _xi0: float

    def slope_at(self, t: float) -> float:
        beta = self._model.problem.beta
        return min(self._xi0 * math.exp(beta * float(t)), self._model.zeta)

    def controls_at(self, t: float) -> tuple:
        t = float(t)
        if t < 0.0:
            raise OutOfDomain("time runs forward only")
        if t >= self.tau:
            tail = self.tail
            if isinstance(tail, StaticPlan):
                return (tail.u, tail.u)
            if isinstance(tail, RelaxedStatic):
                return (tail.nu * tail.a1 + (1.0 - tail.nu) * tail.a2,
                        tail.gamma * tail.q1 + (1.0 - tail.gamma) * tail.q2)
            return tail.controls_at(t - self.tau)
        return _h_controls(self._model, self.slope_at(t))

    def describe(self) -> str:
        tail_desc = self.tail.describe() if hasattr(self.tail, "describe") else str(self.tail)
        return f"drawdown x0={self.x0:.10g} tau={self.tau:.10g} then {tail_desc}"


# ---------------------------------------------------------------------------
# static analysis


def _intersection_span(problem: ValidatedProblem) -> tuple:
    q, a = problem.demand_set, problem.production_set
    lo = max(q.lo, a.lo)
    hi = min(q.hi, a.hi)
    if a.kind == "right_ray":
        hi = q.hi
    return lo, hi


def _candidate_rates(problem: ValidatedProblem) -> np.ndarray:
    """Grid over Q intersect A, honoring finite members and table knots."""
    q, a = problem.demand_set, problem.production_set
    if q.kind == "finite" or a.kind == "finite":
        members = []
        if q.kind == "finite":
            members.extend(u for u in q.values if a.contains(u))
        if a.kind == "finite":
            members.extend(u for u in a.values if q.contains(u))
        if not members:
            members = [0.0]
        return np.unique(np.asarray(members, dtype=float))
    lo, hi = _intersection_span(problem)
    if hi <= lo:
        return np.array([lo])
    pts = [np.linspace(lo, hi, problem.grid_n)]
    for curve in (problem.revenue, problem.cost):
        if curve.family == "table":
            ks = np.asarray(curve.xs, dtype=float)
            pts.append(ks[(ks >= lo) & (ks <= hi)])
    return np.unique(np.concatenate(pts))


def static_candidate(problem) -> tuple:
    """Best constant rate: argmax of R(u) - C(u) over Q intersect A.

    Ties go to the smallest rate.  Returns (u_hat, payoff).
    """
    problem = validate_problem(problem)
    us = _candidate_rates(problem)
    vals = problem.revenue(us) - problem.cost(us)
    vals = np.atleast_1d(vals)
    m = float(vals.max())
    tol = 1e-12 * max(1.0, abs(m))
    idx = int(np.nonzero(vals >= m - tol)[0][0])
    u, payoff = float(us[idx]), float(vals[idx])

    smooth = problem.revenue.has_derivative and problem.cost.has_derivative
    interval_like = problem.demand_set.kind != "finite" \
        and problem.production_set.kind != "finite"
    if smooth and interval_like and len(us) > 2:
        lo = float(us[max(idx - 1, 0)])
        hi = float(us[min(idx + 1, len(us) - 1)])
        if hi > lo:
            res = minimize_scalar(
                lambda t: float(problem.cost(t) - problem.revenue(t)),
                bounds=(lo, hi), method="bounded",
                options={"xatol": 1e-13 * max(1.0, hi)})
            if res.success and -res.fun > payoff + tol:
                u, payoff = float(res.x), float(-res.fun)
            # a sign change of the profit slope pins interior maxima far
            # tighter than a derivative-free search
            ds = problem.revenue.derivative
            dc = problem.cost.derivative
            if ds(lo) - dc(lo) > 0.0 > ds(hi) - dc(hi):
                root = float(brentq(lambda t: ds(t) - dc(t), lo, hi,
                                    xtol=1e-15, rtol=8.9e-16))
                v = float(problem.revenue(root) - problem.cost(root))
                if v > payoff + tol or (abs(v - payoff) <= tol and root < u):
                    u, payoff = root, v
    return u, payoff


def _match_tolerance(env: Envelope) -> float:
    if env.refinable:
        lo, hi = env.domain
        return 1e-6 * max(1.0, hi - lo)
    return 2.0 * float(np.diff(env.xs).max())


def static_optimality_test(problem, model: HamiltonianModel) -> StaticReport:
    """Static plan is optimal iff best sales and best production at slope
    zeta can agree on a common rate."""
    problem = validate_problem(problem)
    u_hat, payoff = static_candidate(problem)
    gap = model.h_min - payoff

    iv_r = contact_argmax_intervals(model.rev_env, model.zeta)
    iv_c = contact_argmax_intervals(model.cost_env, model.zeta)
    d_r = _match_tolerance(model.rev_env)
    d_c = _match_tolerance(model.cost_env)
    witness = None
    for rlo, rhi in iv_r:
        for clo, chi in iv_c:
            lo = max(rlo - d_r, clo - d_c)
            hi = min(rhi + d_r, chi + d_c)
            if lo <= hi:
                w = 0.5 * (max(rlo, clo) + min(rhi, chi))
                witness = float(min(max(w, lo), hi))
                break
        if witness is not None:
            break
    return StaticReport(optimal=witness is not None, u_hat=u_hat,
                        payoff=payoff, gap=float(gap), witness=witness)


# ---------------------------------------------------------------------------
# relaxed optimum and its cyclic realization


def convexified_static(problem, model: HamiltonianModel) -> tuple:
    """Best mean rate for the relaxed problem: argmax of the convexified
    running profit over co(Q) intersect co(A).  Returns (u_tilde, payoff)."""
    problem = validate_problem(problem)
    q_lo, q_hi = model.rev_env.domain
    a_lo, a_hi = model.cost_env.domain
    lo, hi = max(q_lo, a_lo), min(q_hi, a_hi)
    if hi <= lo:
        return lo, float(model.rev_env.hull_at(lo) - model.cost_env.hull_at(lo))
    grid = [np.linspace(lo, hi, problem.grid_n)]
    for env in (model.rev_env, model.cost_env):
        vx = env.xs[env._vidx]
        grid.append(vx[(vx >= lo) & (vx <= hi)])
    us = np.unique(np.concatenate(grid))
    vals = model.rev_env.hull_at(us) - model.cost_env.hull_at(us)
    m = float(vals.max())
    tol = 1e-12 * max(1.0, abs(m))
    idx = int(np.nonzero(vals >= m - tol)[0][0])

    def exact(t: float) -> float:
        return float(model.rev_env.hull_exact(t) - model.cost_env.hull_exact(t))

    # polish against the exact envelopes: bracket endpoints plus, where the
    # convexified profit's slope changes sign, its root
    b_lo = float(us[max(idx - 1, 0)])
    b_hi = float(us[min(idx + 1, len(us) - 1)])
    cands = [float(us[idx]), b_lo, b_hi]
    s_lo = model.rev_env.hull_slope(b_lo) - model.cost_env.hull_slope(b_lo)
    s_hi = model.rev_env.hull_slope(b_hi) - model.cost_env.hull_slope(b_hi)
    if b_hi > b_lo and s_lo > 0.0 > s_hi:
        cands.append(float(brentq(
            lambda t: model.rev_env.hull_slope(t) - model.cost_env.hull_slope(t),
            b_lo, b_hi, xtol=1e-15, rtol=8.9e-16)))
    u, payoff = min(cands), exact(min(cands))
    for t in cands:
        v = exact(t)
        if v > payoff + tol or (abs(v - payoff) <= tol and t < u):
            u, payoff = t, v
    return u, payoff


def relaxed_static(problem, model: HamiltonianModel,
                   u_tilde: float | None = None) -> RelaxedStatic:
    """Decompose the relaxed optimum into two-point mixtures.

    Point masses appear wherever the relevant envelope touches its curve.
    Raises DecompositionMismatch if the mixtures fail to reproduce the
    convexified payoff.
    """
    problem = validate_problem(problem)
    if u_tilde is None:
        u_tilde, _ = convexified_static(problem, model)
    u_tilde = float(u_tilde)

    q1, q2, gamma = hull_decompose(model.rev_env, u_tilde)
    a1, a2, nu = hull_decompose(model.cost_env, u_tilde)

    mean_q = gamma * q1 + (1.0 - gamma) * q2
    mean_a = nu * a1 + (1.0 - nu) * a2
    tol_mean = 1e-9 * max(1.0, abs(u_tilde))
    if abs(mean_q - u_tilde) > tol_mean or abs(mean_a - u_tilde) > tol_mean:
        raise DecompositionMismatch(
            f"mixture means ({mean_q}, {mean_a}) drift from {u_tilde}")

    rev = gamma * float(problem.revenue(q1)) + (1.0 - gamma) * float(problem.revenue(q2))
    cost = nu * float(problem.cost(a1)) + (1.0 - nu) * float(problem.cost(a2))
    payoff = rev - cost
    hull_payoff = float(model.rev_env.hull_exact(u_tilde)
                        - model.cost_env.hull_exact(u_tilde))
    if abs(payoff - hull_payoff) > 1e-6 * max(1.0, abs(hull_payoff)):
        raise DecompositionMismatch(
            f"mixed payoff {payoff:.12g} vs convexified {hull_payoff:.12g}")
    return RelaxedStatic(u_tilde=u_tilde, q1=q1, q2=q2, gamma=float(gamma),
                         a1=a1, a2=a2, nu=float(nu), payoff=float(payoff))


def cyclic_strategy(problem, relaxed: RelaxedStatic, eps: float):
    """Realize a relaxed optimum as a production/sales cycle of period eps.

    High production and low sales lead the cycle, so stock rises from zero
    first and returns to zero at the period's end; with both mixtures
    degenerate this collapses to the static plan.
    """
    problem = validate_problem(problem)
    if eps <= 0.0:
        raise InvalidParameter("cycle period must be positive")
    if not relaxed.sales_mixed and not relaxed.production_mixed:
        return StaticPlan(relaxed.u_tilde)

    sw_a = (1.0 - relaxed.nu) * eps       # produce a2 until here, a1 after
    sw_q = relaxed.gamma * eps            # sell q1 until here, q2 after
    cuts = sorted({0.0, sw_a, sw_q, eps})
    phases = []
    for t0, t1 in zip(cuts, cuts[1:]):
        if t1 - t0 <= 0.0:
            continue
        mid = 0.5 * (t0 + t1)
        a = relaxed.a2 if mid < sw_a else relaxed.a1
        q = relaxed.q1 if mid < sw_q else relaxed.q2
        rate = float(problem.revenue(q) - problem.cost(a))
        phases.append((float(t0), float(t1), float(a), float(q), rate))

    x = 0.0
    peak, peak_t = 0.0, 0.0
    mean = 0.0
    for t0, t1, a, q, rate in phases:
        x_next = x + (a - q) * (t1 - t0)
        if x_next > peak:
            peak, peak_t = x_next, t1
        if x > peak:
            peak, peak_t = x, t0
        x = x_next
        mean += rate * (t1 - t0)
    if x < -1e-9 * max(1.0, peak):
        raise DecompositionMismatch("cycle fails to return stock to zero")
    return CyclicPlan(eps=float(eps), u_tilde=relaxed.u_tilde,
                      phases=tuple(phases), kappa=float(peak_t / eps),
                      peak_stock=float(max(peak, 0.0)),
                      mean_payoff=float(mean / eps))


def cyclic_value(plan: CyclicPlan, beta: float) -> float:
    """Exact discounted payoff of cycling forever from zero stock."""
    if beta <= 0.0:
        raise InvalidParameter("discount rate must be positive")
    one = 0.0
    for t0, t1, _, _, rate in plan.phases:
        one += rate * (math.exp(-beta * t0) - math.exp(-beta * t1)) / beta
    return one / (1.0 - math.exp(-beta * plan.eps))


# ---------------------------------------------------------------------------
# drawdown of initial stock


def drawdown_plan(problem, vf: ValueFunction, model: HamiltonianModel,
                  x0: float, tail: str = "auto", eps: float | None = None,
                  n_knots: int = 1025):
    """Optimal plan from initial stock x0.

    tail selects the stationary plan once stock hits zero: "auto" runs the
    static test and falls back to relaxed/cyclic, "static", "relaxed", and
    "cyclic" force a kind.  eps sets the cycle period when the tail
    cycles (default 1/beta scaled down to 2^-6).
    """
    problem = validate_problem(problem)
    if x0 < 0.0:
        raise OutOfDomain("initial stock must be non-negative")
    beta = problem.beta

    if model.zeta <= 0.0:
        warnings.warn("stock has no marginal value; selling it is pointless "
                      "and the static plan at rate 0 is already optimal",
                      ZetaZeroWarning)
        return StaticPlan(0.0)

    report = static_optimality_test(problem, model)
    if tail == "auto":
        tail = "static" if report.optimal else "cyclic"
    if tail == "static":
        if not report.optimal:
            raise InvalidParameter(
                "static tail requested but no constant rate attains min H")
        tail_plan = StaticPlan(report.witness if report.witness is not None
                               else report.u_hat)
    elif tail == "relaxed":
        tail_plan = relaxed_static(problem, model)
    elif tail == "cyclic":
        relaxed = relaxed_static(problem, model)
        if eps is None:
            eps = (1.0 / beta) / 64.0
        tail_plan = cyclic_strategy(problem, relaxed, eps)
    else:
        raise InvalidParameter(f"unknown tail kind {tail!r}")

    if x0 == 0.0:
        return tail_plan

    xi0 = vf.v_prime(x0)
    xi0 = min(xi0, model.zeta)
    if xi0 <= 0.0:
        raise InvalidParameter("marginal value vanished; stock too large "
                               "for the resolved slope table")
    tau = math.log(model.zeta / xi0) / beta

    # Controls jump where the slope path crosses a kink of H.  Each
    # crossing gets two knots at the same instant carrying the one-sided
    # controls, so quadrature over the knots never straddles a jump.
    switch_zs = [float(z) for z in model.kink_zs
                 if xi0 * (1.0 + 1e-12) <= z <= model.zeta * (1.0 - 1e-12)]
    base = np.linspace(0.0, tau, n_knots)
    if switch_zs:
        keep = np.ones(n_knots, dtype=bool)
        for z in switch_zs:
            keep &= np.abs(base - math.log(z / xi0) / beta) \
                > 1e-9 * max(tau, 1.0)
        keep[0] = keep[-1] = True
        pts = [(float(t), None) for t in base[keep]]
        for z in switch_zs:
            t_star = math.log(z / xi0) / beta
            dz = 1e-7 * max(1.0, z)
            pts.append((t_star, z - dz))
            pts.append((t_star, z + dz))
        pts.sort(key=lambda p: (p[0], p[1] if p[1] is not None else 0.0))
    else:
        pts = [(float(t), None) for t in base]

    n = len(pts)
    t_knots = np.array([p[0] for p in pts])
    x_knots = np.empty(n)
    a_knots = np.empty(n)
    q_knots = np.empty(n)
    for i, (t, z_side) in enumerate(pts):
        xi = min(xi0 * math.exp(beta * t), model.zeta)
        x_knots[i] = vf.psi(float(xi))
        z_query = xi if z_side is None else min(max(z_side, 0.0), model.zeta)
        a_knots[i], q_knots[i] = _h_controls(model, float(z_query))
    x_knots[0] = x0
    x_knots[-1] = 0.0
    return DrawdownPlan(x0=float(x0), tau=float(tau), t_knots=t_knots,
                        x_knots=x_knots, a_knots=a_knots, q_knots=q_knots,
                        tail=tail_plan, _model=model, _xi0=float(xi0))


# ---------------------------------------------------------------------------
# closed-form references for the built-in families


@dataclass(frozen=True)
class AMReference:
    """Closed-form answers for the cubic-cost family."""
    regime: str                 # "i", "ii", or "iii"
    t1: float
    t2: float
    zeta: float
    u_static: float
    static_optimal: bool
    u_tilde: float
    nu: float
    support: tuple


def arvan_moses_reference(a_coef: float, b_coef: float, k: float) -> AMReference:
    """Reference values for demand a - b q and cost a^3/3 - k a^2 + k^2 a.

    Static plans fail exactly for t1 < a < t2 with t1 = k^2/4 and
    t2 = 3 b k + k^2/4; in between the relaxed optimum mixes production
    over {0, 3k/2}.
    """
    A, B, K = float(a_coef), float(b_coef), float(k)
    t1 = K * K / 4.0
    t2 = 3.0 * B * K + K * K / 4.0
    if A <= t1:
        return AMReference(regime="i", t1=t1, t2=t2, zeta=A, u_static=0.0,
                           static_optimal=True, u_tilde=0.0, nu=1.0,
                           support=(0.0, 0.0))
    if A >= t2:
        root = math.sqrt(B * B - 2.0 * B * K + A)
        zeta = (-B + root) ** 2
        u = -B + K + root
        return AMReference(regime="iii", t1=t1, t2=t2, zeta=zeta, u_static=u,
                           static_optimal=True, u_tilde=u, nu=1.0,
                           support=(u, u))
    zeta = t1
    u_tilde = (A - t1) / (2.0 * B)
    nu = 1.0 - 2.0 * u_tilde / (3.0 * K)
    u_static, _ = (u_tilde, None)
    return AMReference(regime="ii", t1=t1, t2=t2, zeta=zeta, u_static=u_tilde,
                       static_optimal=False, u_tilde=u_tilde, nu=nu,
                       support=(0.0, 1.5 * K))


@dataclass(frozen=True)
class LinearCostReference:
    """Closed-form answers for the affine-cost family."""
    zeta: float
    u_static: float
    x_hat: float


def linear_cost_reference(c: float, alpha_bar: float, q_bar: float,
                          a_coef: float, b_coef: float, beta: float) -> LinearCostReference:
    """Reference values for demand a - b q on [0, q_bar], cost c per unit
    on [0, alpha_bar], assuming q_bar does not bind at the optimum.

    zeta = min(a, max(c, a - 2 b alpha_bar)); production stops once stock
    exceeds x_hat, the stock level at which the marginal value drops to c.
    """
    A, B = float(a_coef), float(b_coef)
    c, alpha_bar, beta = float(c), float(alpha_bar), float(beta)
    zeta = min(A, max(c, A - 2.0 * B * alpha_bar))
    u_static = min((A - zeta) / (2.0 * B), q_bar)
    if zeta <= c:
        x_hat = 0.0
    else:
        x_hat = -(1.0 / beta) * ((alpha_bar - A / (2.0 * B)) * math.log(zeta / c)
                                 + (zeta - c) / (2.0 * B))
    return LinearCostReference(zeta=zeta, u_static=u_static, x_hat=x_hat)
