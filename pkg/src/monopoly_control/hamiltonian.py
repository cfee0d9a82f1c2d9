"""Running-profit function H and its minimizing slope band.

H(z) = sup_q {R(q) - q z} + sup_a {a z - C(a)} prices a unit of stock at z
and asks for the best instantaneous profit.  It is convex; its smallest
minimizer zeta is the marginal value of the first unit of inventory and
drives the whole value function.  The model tabulates H on a z grid wide
enough that the minimum is interior, truncating an unbounded production
set high enough that the truncation is invisible to every query on the
grid.

One-sided derivative selections of H come from the attaining sets:
H'(z+) = max attaining a - min attaining q, H'(z-) the mirror.  zeta is
the first zero crossing of H'(z+), found by bisection on refined
conjugate queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .envelope import (
    Envelope,
    concave_hull,
    convex_hull,
    cost_argmax_grid,
    fenchel_cost,
    fenchel_cost_grid,
    fenchel_revenue,
    fenchel_revenue_grid,
    revenue_argmax_grid,
)
from .errors import InvalidParameter, OutOfDomain, TruncationFailed
from .problem import ValidatedProblem, validate_problem

_MAX_GROWTH = 60


@dataclass(frozen=True, eq=False)
class HamiltonianModel:
    """Tabulated running-profit function with its minimizer band.

    z_grid/H are the piecewise-linear tabulation used for bulk queries;
    scalar queries go back to the envelopes and refine.  [m_lo, m_hi] is
    the set of minimizers of H, with zeta = m_lo the one the value
    function uses.  trunc_bound is the production ceiling substituted for
    an unbounded production set (None when the set was already bounded).
    """

    problem: ValidatedProblem = field(repr=False)
    rev_env: Envelope = field(repr=False)
    cost_env: Envelope = field(repr=False)
    z_grid: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    zeta: float
    m_lo: float
    m_hi: float
    h_min: float
    kink_zs: np.ndarray = field(repr=False)
    trunc_bound: float | None

    @property
    def z_max(self) -> float:
        return float(self.z_grid[-1])


def _curve_kwargs(curve, cset):
    if cset.kind != "finite" and curve.has_derivative:
        return dict(evaluator=curve, derivative=curve.derivative,
                    derivative_inverse=curve.derivative_inverse())
    return {}


def _revenue_envelope(problem: ValidatedProblem) -> Envelope:
    curve = problem.revenue
    xs = problem.q_grid
    return concave_hull(xs, curve(xs),
                        finite=problem.demand_set.kind == "finite",
                        **_curve_kwargs(curve, problem.demand_set))


def _cost_envelope(problem: ValidatedProblem, ceiling: float | None) -> Envelope:
    curve = problem.cost
    if problem.a_grid is not None:
        xs = problem.a_grid
    else:
        xs = problem.a_grid_to(ceiling)
    return convex_hull(xs, curve(xs),
                       finite=problem.production_set.kind == "finite",
                       **_curve_kwargs(curve, problem.production_set))


def _h_refined(rev_env: Envelope, cost_env: Envelope, z: float) -> float:
    return fenchel_revenue(rev_env, z).value + fenchel_cost(cost_env, z).value


def build_hamiltonian(problem, ray_ceiling: float | None = None) -> HamiltonianModel:
    """Tabulate H, locate its minimizer band, and freeze the model.

    ray_ceiling overrides the starting truncation bound for an unbounded
    production set (it still grows if too tight).  Results must not
    depend on it; it exists so tests can verify exactly that.
    """
    problem = validate_problem(problem)
    rev_env = _revenue_envelope(problem)

    unbounded = problem.a_grid is None
    q_hi = float(problem.q_grid[-1])
    ceiling = None
    if unbounded:
        ceiling = 2.0 * (q_hi + 1.0)
        if ray_ceiling is not None:
            if ray_ceiling <= 0.0:
                raise InvalidParameter("ray ceiling must be positive")
            ceiling = float(ray_ceiling)
    rev_slope = max((abs(s.slope) for s in rev_env.segments), default=1.0)
    z_max = 2.0 * max(1.0, rev_slope)

    cost_env = _cost_envelope(problem, ceiling)
    h0 = _h_refined(rev_env, cost_env, 0.0)
    gap = 1e-9 * max(1.0, abs(h0))
    for _ in range(_MAX_GROWTH):
        wide = _h_refined(rev_env, cost_env, z_max) > h0 + gap
        covered = True
        if unbounded:
            covered = fenchel_cost(cost_env, z_max).argmax_hi < 0.9 * ceiling
        if wide and covered:
            break
        if not covered:
            ceiling *= 2.0
            cost_env = _cost_envelope(problem, ceiling)
        if not wide:
            z_max *= 2.0
    else:
        raise TruncationFailed(
            "could not bracket the minimum of the running-profit function; "
            "production set may fail the coercivity margin")

    z_grid = np.linspace(0.0, z_max, problem.grid_n)
    H = fenchel_revenue_grid(rev_env, z_grid) + fenchel_cost_grid(cost_env, z_grid)

    kinks = np.concatenate([rev_env.kink_slopes(), cost_env.kink_slopes()])
    kinks = np.unique(kinks[(kinks > 0.0) & (kinks <= z_max)])

    def h_plus(z: float) -> float:
        cv_c = fenchel_cost(cost_env, z)
        cv_r = fenchel_revenue(rev_env, z)
        return cv_c.argmax_hi - cv_r.argmax_lo

    if h_plus(0.0) >= 0.0:
        zeta = 0.0
    else:
        # coarse vertex-level scan for a sign bracket, then bisect refined
        a_hi = cost_argmax_grid(cost_env, z_grid, side="right")
        q_lo = revenue_argmax_grid(rev_env, z_grid, side="left")
        coarse = a_hi - q_lo
        nz = np.nonzero(coarse >= 0.0)[0]
        i = int(nz[0]) if len(nz) else len(z_grid) - 1
        lo = float(z_grid[max(i - 2, 0)])
        hi = float(z_grid[min(i + 1, len(z_grid) - 1)])
        while h_plus(lo) >= 0.0 and lo > 0.0:
            lo = max(0.0, lo - (hi - lo))
        while h_plus(hi) < 0.0 and hi < z_max:
            hi = min(z_max, hi + (hi - lo))
        for _ in range(100):
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            if h_plus(mid) >= 0.0:
                hi = mid
            else:
                lo = mid
        zeta = hi
        # a minimizer at a kink resolves only to the conjugate span
        # tolerance; snap when a kink sits within that haze
        for kz in kinks:
            if abs(kz - zeta) <= 1e-8 * max(1.0, kz):
                cv_c = fenchel_cost(cost_env, kz)
                cv_r = fenchel_revenue(rev_env, kz)
                if cv_c.argmax_hi - cv_r.argmax_lo >= 0.0 \
                        and cv_c.argmax_lo - cv_r.argmax_hi <= 0.0:
                    zeta = kz
                    break

    h_min = _h_refined(rev_env, cost_env, zeta)
    thr = h_min + 1e-12 * max(1.0, abs(h_min))
    if _h_refined(rev_env, cost_env, z_max) <= thr:
        m_hi = z_max
    else:
        lo, hi = zeta, z_max
        for _ in range(100):
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            if _h_refined(rev_env, cost_env, mid) <= thr:
                lo = mid
            else:
                hi = mid
        m_hi = lo

    return HamiltonianModel(problem=problem, rev_env=rev_env, cost_env=cost_env,
                            z_grid=z_grid, H=H, zeta=float(zeta), m_lo=float(zeta),
                            m_hi=float(m_hi), h_min=float(h_min), kink_zs=kinks,
                            trunc_bound=ceiling)


def h_at(model: HamiltonianModel, z, *, refine: bool = True):
    """H(z); refined scalar queries hit the envelopes, bulk ones the table."""
    if np.ndim(z) == 0:
        z = float(z)
        if not (0.0 <= z <= model.z_max):
            raise OutOfDomain(f"z={z} outside [0, {model.z_max}]")
        if refine:
            return _h_refined(model.rev_env, model.cost_env, z)
        return float(np.interp(z, model.z_grid, model.H))
    z = np.asarray(z, dtype=float)
    if z.size and (z.min() < 0.0 or z.max() > model.z_max):
        raise OutOfDomain("z grid outside tabulated range")
    return np.interp(z, model.z_grid, model.H)


def subgradient(model: HamiltonianModel, z: float) -> tuple:
    """One-sided derivatives (H'(z-), H'(z+)) from the attaining sets."""
    z = float(z)
    if not (0.0 <= z <= model.z_max):
        raise OutOfDomain(f"z={z} outside [0, {model.z_max}]")
    cv_c = fenchel_cost(model.cost_env, z)
    cv_r = fenchel_revenue(model.rev_env, z)
    return (cv_c.argmax_lo - cv_r.argmax_hi, cv_c.argmax_hi - cv_r.argmax_lo)


def deriv_plus_grid(model: HamiltonianModel, zs) -> np.ndarray:
    """H'(z+) on an array of z; exact at tabulated kink slopes."""
    zs = np.asarray(zs, dtype=float)
    a = cost_argmax_grid(model.cost_env, zs, side="right")
    q = revenue_argmax_grid(model.rev_env, zs, side="left")
    return a - q


def deriv_minus_grid(model: HamiltonianModel, zs) -> np.ndarray:
    """H'(z-) on an array of z."""
    zs = np.asarray(zs, dtype=float)
    a = cost_argmax_grid(model.cost_env, zs, side="left")
    q = revenue_argmax_grid(model.rev_env, zs, side="right")
    return a - q


def controls_at(model: HamiltonianModel, z: float) -> tuple:
    """Smallest attaining (production, sales) pair at slope z."""
    z = float(z)
    cv_c = fenchel_cost(model.cost_env, z)
    cv_r = fenchel_revenue(model.rev_env, z)
    return (cv_c.argmax_lo, cv_r.argmax_lo)
