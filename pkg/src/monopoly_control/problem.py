"""Problem data: control sets, revenue/cost curves, validation.

A problem instance is a discount rate beta together with a compact demand
set Q, a closed production set A (both containing 0 and something besides
0), a continuous revenue curve R on Q with R(0) = 0 and R >= 0, and a
continuous non-decreasing cost curve C >= 0 on A.  When A is unbounded the
average cost C(a)/a must grow without bound, otherwise arbitrarily cheap
mass production would make the control problem degenerate.

Everything downstream consumes a ValidatedProblem, which freezes the
sample grids used by the envelope and conjugate machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssumptionViolation,
    CoercivityUndetectable,
    DegenerateGrid,
    InvalidParameter,
)

DEFAULT_GRID_N = 4097

# Relative slack used by the sign/monotonicity checks in validate_problem.
_VAL_TOL = 1e-12


# ---------------------------------------------------------------------------
# control sets


@dataclass(frozen=True)
class ControlSet:
    """A closed subset of the non-negative rates.

    One of three kinds:

    ``interval``
        [lo, hi] with 0 <= lo < hi.
    ``finite``
        a strictly increasing tuple of rates.
    ``right_ray``
        [lo, inf); only legal as a production set.
    """

    kind: str
    lo: float = 0.0
    hi: float = math.inf
    values: tuple[float, ...] = ()

    @staticmethod
    def interval(lo: float, hi: float) -> "ControlSet":
        if not (0.0 <= lo < hi) or not math.isfinite(hi):
            raise InvalidParameter(f"interval needs 0 <= lo < hi < inf, got [{lo}, {hi}]")
        return ControlSet("interval", float(lo), float(hi))

    @staticmethod
    def finite(values) -> "ControlSet":
        vals = tuple(float(v) for v in values)
        if len(vals) < 2:
            raise InvalidParameter("finite control set needs at least two rates")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidParameter("finite control set must be strictly increasing")
        if vals[0] < 0.0:
            raise InvalidParameter("rates must be non-negative")
        return ControlSet("finite", vals[0], vals[-1], vals)

    @staticmethod
    def right_ray(lo: float = 0.0) -> "ControlSet":
        if lo < 0.0:
            raise InvalidParameter("ray origin must be non-negative")
        return ControlSet("right_ray", float(lo), math.inf)

    @property
    def is_bounded(self) -> bool:
        return self.kind != "right_ray"

    def contains(self, x: float, tol: float = 1e-12) -> bool:
        if x < self.lo - tol:
            return False
        if self.kind == "finite":
            return any(abs(x - v) <= tol for v in self.values)
        return x <= self.hi + tol

    def sample(self, n: int, hi: float | None = None) -> np.ndarray:
        """Sample grid over the set (finite sets return their members).

        For a right ray a finite ceiling ``hi`` must be supplied.
        """
        if self.kind == "finite":
            return np.asarray(self.values)
        top = self.hi if hi is None else float(hi)
        if not math.isfinite(top):
            raise InvalidParameter("unbounded set needs an explicit ceiling")
        if n < 2:
            raise DegenerateGrid("need at least two sample points")
        return np.linspace(self.lo, top, n)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class Curve:
    """Revenue or cost curve.

    Closed-form families evaluate exactly anywhere and expose a derivative,
    which the envelope refinement uses to pin contact points; Table curves
    interpolate linearly between knots and have no derivative.

    Families
    --------
    linear_demand : R(q) = (a - b q) q
    affine        : C(x) = c x
    cubic         : C(x) = x^3/3 - k x^2 + k^2 x
    table         : piecewise linear through given (x, y) knots
    """

    family: str
    params: tuple[float, ...] = ()
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()

    @staticmethod
    def linear_demand_revenue(a: float, b: float) -> "Curve":
        if a <= 0 or b <= 0:
            raise InvalidParameter("linear demand needs positive coefficients")
        return Curve("linear_demand", (float(a), float(b)))

    @staticmethod
    def affine_cost(c: float) -> "Curve":
        if c <= 0:
            raise InvalidParameter("affine cost needs a positive slope")
        return Curve("affine", (float(c),))

    @staticmethod
    def cubic_cost(k: float) -> "Curve":
        if k <= 0:
            raise InvalidParameter("cubic cost needs k > 0")
        return Curve("cubic", (float(k),))

    @staticmethod
    def table(points) -> "Curve":
        pts = sorted((float(x), float(y)) for x, y in points)
        if len(pts) < 2:
            raise DegenerateGrid("table needs at least two knots")
        xs = tuple(p[0] for p in pts)
        ys = tuple(p[1] for p in pts)
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidParameter("table knots must be strictly increasing")
        return Curve("table", (), xs, ys)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "linear_demand":
            a, b = self.params
            out = (a - b * x) * x
        elif self.family == "affine":
            out = self.params[0] * x
        elif self.family == "cubic":
            k = self.params[0]
            out = x * x * x / 3.0 - k * x * x + k * k * x
        elif self.family == "table":
            out = np.interp(x, self.xs, self.ys)
        else:  # pragma: no cover
            raise InvalidParameter(f"unknown curve family {self.family!r}")
        return out if out.ndim else float(out)

    @property
    def has_derivative(self) -> bool:
        return self.family != "table"

    def derivative(self, x):
        """Exact derivative; only closed-form families provide one."""
        if not self.has_derivative:
            raise InvalidParameter("table curves have no derivative")
        x = np.asarray(x, dtype=float)
        if self.family == "linear_demand":
            a, b = self.params
            out = a - 2.0 * b * x
        elif self.family == "affine":
            out = np.full_like(x, self.params[0])
        else:
            k = self.params[0]
            out = (x - k) ** 2
        return out if out.ndim else float(out)

    def derivative_inverse(self):
        """Callable z -> x with derivative(x) = z on the curve's monotone
        branch, or None.  Affine curves have no branch; tables no derivative.
        The cubic uses its increasing branch x >= k, which is where convex
        envelopes place interior contacts."""
        if self.family == "linear_demand":
            a, b = self.params
            return lambda z: (a - np.asarray(z, dtype=float)) / (2.0 * b)
        if self.family == "cubic":
            k = self.params[0]
            return lambda z: k + np.sqrt(np.maximum(np.asarray(z, dtype=float), 0.0))
        return None

    def domain(self) -> tuple[float, float]:
        """Range over which the curve is trustworthy (tables: knot span)."""
        if self.family == "table":
            return self.xs[0], self.xs[-1]
        return 0.0, math.inf


# ---------------------------------------------------------------------------
# problem spec


@dataclass(frozen=True)
class ProblemSpec:
    """Unvalidated problem description."""

    beta: float
    demand_set: ControlSet
    production_set: ControlSet
    revenue: Curve
    cost: Curve
    grid_n: int = DEFAULT_GRID_N


@dataclass(frozen=True, eq=False)
class ValidatedProblem:
    """A ProblemSpec that passed validate_problem, plus its sample grids.

    ``q_grid`` covers co(Q).  ``a_grid`` covers co(A) for bounded A and is
    None for a right ray, where the truncation bound is chosen later by the
    Hamiltonian builder (see ``a_grid_to``).
    """

    spec: ProblemSpec
    q_grid: np.ndarray = field(repr=False)
    a_grid: np.ndarray | None = field(repr=False)

    @property
    def beta(self) -> float:
        return self.spec.beta

    @property
    def demand_set(self) -> ControlSet:
        return self.spec.demand_set

    @property
    def production_set(self) -> ControlSet:
        return self.spec.production_set

    @property
    def revenue(self) -> Curve:
        return self.spec.revenue

    @property
    def cost(self) -> Curve:
        return self.spec.cost

    @property
    def grid_n(self) -> int:
        return self.spec.grid_n

    def a_grid_to(self, ceiling: float) -> np.ndarray:
        """Production grid up to a truncation ceiling (right rays only)."""
        return self.production_set.sample(self.grid_n, hi=ceiling)


def _merge_knots(grid: np.ndarray, curve: Curve, cset: ControlSet) -> np.ndarray:
    """Fold table knots into a sample grid.

    A linspace can straddle a table knot, hiding a kink (or a whole spike)
    from anything built on the samples.  Finite sets stay untouched: their
    members are the only admissible points.
    """
    if curve.family != "table" or cset.kind == "finite":
        return grid
    ks = np.asarray(curve.xs, dtype=float)
    return np.union1d(grid, ks[(ks >= grid[0]) & (ks <= grid[-1])])


def _check_curve_domain(curve: Curve, cset: ControlSet, label: str) -> None:
    lo, hi = curve.domain()
    if cset.lo < lo - _VAL_TOL:
        raise AssumptionViolation(f"{label} curve is undefined below {lo}")
    top = cset.hi if cset.is_bounded else math.inf
    if top > hi + _VAL_TOL:
        if curve.family == "table" and not cset.is_bounded:
            raise CoercivityUndetectable(
                "a finite cost table cannot certify unbounded average cost growth "
                "on a production ray"
            )
        raise AssumptionViolation(f"{label} table does not cover the control set")


def _check_coercive(cost: Curve, slope_bound: float) -> None:
    """Certify C(a)/a -> inf for an unbounded production set.

    Samples average cost on a geometric grid, finds its knee (global
    minimum), and requires the average cost to be non-decreasing past the
    knee and to exceed ``slope_bound`` at the far end.
    """
    grid = np.geomspace(1e-6, 1e9, 1024)
    avg = np.asarray(cost(grid)) / grid
    knee = int(np.argmin(avg))
    tail = avg[knee:]
    scale = max(abs(tail[0]), abs(tail[-1]), 1.0)
    if np.any(np.diff(tail) < -1e-9 * scale):
        raise AssumptionViolation("average production cost decreases past its knee")
    if tail[-1] < slope_bound:
        raise AssumptionViolation(
            "production cost is not coercive: average cost stays below "
            f"{slope_bound:g} on an unbounded production set"
        )


def validate_problem(spec: ProblemSpec | ValidatedProblem,
                     coercivity_slope_bound: float = 1e6) -> ValidatedProblem:
    """Check the standing assumptions and freeze the sample grids.

    Raises AssumptionViolation (or CoercivityUndetectable / InvalidParameter)
    with a message naming the violated assumption.  Idempotent: passing an
    already validated problem returns it unchanged.
    """
    if isinstance(spec, ValidatedProblem):
        return spec
    if not (spec.beta > 0 and math.isfinite(spec.beta)):
        raise InvalidParameter("discount rate beta must be positive and finite")
    if spec.grid_n < 9:
        raise InvalidParameter("grid_n must be at least 9")

    Q, A = spec.demand_set, spec.production_set
    if not Q.is_bounded:
        raise AssumptionViolation("the demand set must be compact")
    if not Q.contains(0.0):
        raise AssumptionViolation("0 must belong to the demand set")
    if not A.contains(0.0):
        raise AssumptionViolation("0 must belong to the production set")
    # Both sets must offer something besides shutdown.
    if Q.hi <= 0.0:
        raise AssumptionViolation("the demand set must contain a positive rate")
    if A.is_bounded and A.hi <= 0.0:
        raise AssumptionViolation("the production set must contain a positive rate")

    _check_curve_domain(spec.revenue, Q, "revenue")
    _check_curve_domain(spec.cost, A, "cost")

    q_grid = _merge_knots(Q.sample(spec.grid_n), spec.revenue, Q)
    r_vals = np.asarray(spec.revenue(q_grid))
    r_scale = float(np.max(np.abs(r_vals))) or 1.0
    if abs(float(spec.revenue(0.0))) > _VAL_TOL * r_scale:
        raise AssumptionViolation("revenue must vanish at zero demand")
    if np.any(r_vals < -_VAL_TOL * r_scale):
        raise AssumptionViolation("revenue must be non-negative on the demand set")

    if A.is_bounded:
        a_grid = _merge_knots(A.sample(spec.grid_n), spec.cost, A)
    else:
        _check_coercive(spec.cost, coercivity_slope_bound)
        # Coercivity probe doubles as the monotonicity sample.
        a_grid = None
    probe = a_grid if a_grid is not None else np.linspace(0.0, 16.0, spec.grid_n)
    c_vals = np.asarray(spec.cost(probe))
    c_scale = float(np.max(np.abs(c_vals))) or 1.0
    if np.any(c_vals < -_VAL_TOL * c_scale):
        raise AssumptionViolation("production cost must be non-negative")
    if np.any(np.diff(c_vals) < -_VAL_TOL * c_scale):
        raise AssumptionViolation("production cost must be non-decreasing")

    return ValidatedProblem(spec, q_grid, a_grid)


# ---------------------------------------------------------------------------
# built-in families


def builtin_linear_cost(c: float, alpha_bar: float, q_bar: float,
                        revenue: Curve, beta: float,
                        grid_n: int = DEFAULT_GRID_N) -> ProblemSpec:
    """Bounded production at constant marginal cost c against a strictly
    concave revenue.

    Q = [0, q_bar], A = [0, alpha_bar], C(a) = c a.  The revenue curve must
    be strictly concave on [0, q_bar]; checked by second differences.
    """
    if c <= 0 or alpha_bar <= 0 or q_bar <= 0 or beta <= 0:
        raise InvalidParameter("c, alpha_bar, q_bar and beta must be positive")
    qs = np.linspace(0.0, q_bar, 513)
    rv = np.asarray(revenue(qs))
    second = np.diff(rv, 2)
    if np.any(second >= -1e-12 * (np.max(np.abs(rv)) or 1.0)):
        raise InvalidParameter("revenue must be strictly concave on [0, q_bar]")
    return ProblemSpec(
        beta=float(beta),
        demand_set=ControlSet.interval(0.0, q_bar),
        production_set=ControlSet.interval(0.0, alpha_bar),
        revenue=revenue,
        cost=Curve.affine_cost(c),
        grid_n=grid_n,
    )


def builtin_arvan_moses(a_coef: float, b_coef: float, k: float, beta: float,
                        grid_n: int = DEFAULT_GRID_N) -> ProblemSpec:
    """Linear demand against a concave-then-convex cubic cost on a ray.

    R(q) = (a - b q) q on Q = [0, a/b]; C(x) = x^3/3 - k x^2 + k^2 x on
    A = [0, inf).  The cost is concave up to k and convex beyond, so for a
    middle range of demand intercepts no constant production rate is
    optimal and the solver falls back to two-point mixtures.
    """
    if a_coef <= 0 or b_coef <= 0 or k <= 0 or beta <= 0:
        raise InvalidParameter("all coefficients must be positive")
    return ProblemSpec(
        beta=float(beta),
        demand_set=ControlSet.interval(0.0, a_coef / b_coef),
        production_set=ControlSet.right_ray(0.0),
        revenue=Curve.linear_demand_revenue(a_coef, b_coef),
        cost=Curve.cubic_cost(k),
        grid_n=grid_n,
    )
