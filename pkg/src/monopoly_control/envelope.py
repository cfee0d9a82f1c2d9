"""Convex and concave envelopes of sampled curves, with Fenchel conjugates.

The solver never needs the raw revenue or cost curve, only its concave or
convex envelope: the running Hamiltonian is blind to the difference, and
two-point mixtures recover anything the envelope promises.  An Envelope is
built from samples by a monotone chain; where the hull bridges a non-convex
dip of a closed-form curve, the bridge endpoints are then polished by
solving the common-tangent conditions on the continuous curve and inserted
as knots, giving contact points far below sample resolution.  Table curves
keep knot-only contacts.

Conjugate queries come in two orientations:

* ``fenchel_cost``     sup_a  { a z - C(a) }   over a convex envelope,
* ``fenchel_revenue``  sup_q  { R(q) - q z }   over a concave envelope,

both reducible to one kernel on the oriented (lower-hull) data.  Grid
variants evaluate the piecewise-linear conjugate for whole z arrays; the
scalar variants optionally refine the maximizer against the original curve
through its derivative.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import DecompositionMismatch, DegenerateGrid, InvalidParameter, OutOfDomain


class AffineSegment(NamedTuple):
    slope: float
    lo: float
    hi: float


@dataclass(frozen=True)
class ConjugateValue:
    """Conjugate value with the attaining set's endpoints.

    argmax_lo == argmax_hi for a unique maximizer; they differ when the
    query slope ties an affine piece of the envelope, in which case the
    whole piece attains.
    """

    value: float
    argmax_lo: float
    argmax_hi: float


@dataclass(frozen=True, eq=False)
class Envelope:
    """Envelope of a sampled curve; immutable after construction.

    xs, f, hull are parallel arrays (knots, curve values, envelope values).
    contact marks knots where the envelope touches the curve.  segments are
    the maximal affine pieces of the envelope; every non-contact knot lies
    strictly inside one of them.
    """

    kind: str                       # "convex" or "concave"
    xs: np.ndarray = field(repr=False)
    f: np.ndarray = field(repr=False)
    hull: np.ndarray = field(repr=False)
    contact: np.ndarray = field(repr=False)
    segments: list = field(repr=False)
    # oriented internals: _g = sign*f has a lower hull with increasing slopes
    _sign: float = field(repr=False)
    _vidx: np.ndarray = field(repr=False)       # vertex indices into xs
    _vg: np.ndarray = field(repr=False)         # oriented values at vertices
    _es: np.ndarray = field(repr=False)         # oriented edge slopes, increasing
    _eval: Callable | None = field(repr=False, default=None)
    _deriv: Callable | None = field(repr=False, default=None)
    _dinv: Callable | None = field(repr=False, default=None)
    # knots are the only admissible points; everything between them is
    # reachable solely as a mixture of knots
    finite_support: bool = False

    @property
    def refinable(self) -> bool:
        return self._deriv is not None

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    @property
    def value_tol(self) -> float:
        rng = float(self.f.max() - self.f.min())
        return 1e-9 * (rng if rng > 0.0 else max(1.0, float(np.abs(self.f).max())))

    def f_at(self, x):
        """Original curve, exact for closed forms."""
        if self._eval is not None:
            return self._eval(x)
        out = np.interp(x, self.xs, self.f)
        return float(out) if np.ndim(x) == 0 else out

    def hull_at(self, x):
        """Envelope value, piecewise linear through hull vertices."""
        vx = self.xs[self._vidx]
        vy = self._sign * self._vg
        out = np.interp(x, vx, vy)
        return float(out) if np.ndim(x) == 0 else out

    def hull_exact(self, x: float) -> float:
        """Envelope value using the continuous curve off bridges.

        On a bridge the refined chord is exact; elsewhere the envelope
        coincides with the curve, so the curve itself is the better value.
        With finite support there is no curve between knots and every edge
        is its own chord.
        """
        lo, hi = self.domain
        if not (lo - 1e-12 <= x <= hi + 1e-12):
            raise OutOfDomain(f"{x} outside [{lo}, {hi}]")
        e = self._edge_of(x)
        if e is not None and (self.finite_support or self._edge_is_bridge(e)):
            vx = self.xs[self._vidx]
            a, b = vx[e], vx[e + 1]
            ga, gb = self._vg[e], self._vg[e + 1]
            t = (x - a) / (b - a)
            return self._sign * ((1.0 - t) * ga + t * gb)
        return float(self.f_at(x))

    # -- internal geometry helpers

    def hull_slope(self, x: float) -> float:
        """Derivative of the envelope at x (an edge slope where x sits on
        a bridge or between table knots, the curve's own slope elsewhere)."""
        lo, hi = self.domain
        if not (lo - 1e-12 <= x <= hi + 1e-12):
            raise OutOfDomain(f"{x} outside [{lo}, {hi}]")
        e = self._edge_of(x)
        if e is not None and (self._edge_is_bridge(e) or self._deriv is None):
            return float(self._sign * self._es[e])
        if self._deriv is not None:
            return float(self._deriv(min(max(x, lo), hi)))
        # x coincides with a vertex of a table envelope: mean of edge slopes
        vx = self.xs[self._vidx]
        k = int(np.searchsorted(vx, x))
        k = min(max(k, 0), len(self._es) - 1)
        s_lo = self._es[max(k - 1, 0)]
        s_hi = self._es[min(k, len(self._es) - 1)]
        return float(self._sign * 0.5 * (s_lo + s_hi))

    def _edge_of(self, x: float):
        """Index of the hull edge whose open x-interval holds x, else None."""
        vx = self.xs[self._vidx]
        k = int(np.searchsorted(vx, x))
        if k == 0 or k >= len(vx):
            return None
        if x == vx[k] or x == vx[k - 1]:
            return None
        return k - 1

    def _edge_is_bridge(self, e: int) -> bool:
        i, j = self._vidx[e], self._vidx[e + 1]
        if j - i <= 1:
            return False
        return not bool(self.contact[i + 1:j].all())

    def kink_slopes(self) -> np.ndarray:
        """Slopes where a conjugate's maximizer genuinely jumps.

        For piecewise-linear curves (tables, finite sets) every hull edge
        slope is such a kink.  For smooth refinable curves only multi-knot
        affine pieces (bridges, true flats) kink the conjugate, plus the
        end-of-domain derivatives where the maximizer saturates.  Consumers
        insert these into their own grids; spurious entries are harmless.
        """
        if not self.refinable:
            return np.unique(self._sign * self._es)
        out = []
        for e, s in enumerate(self._es):
            i, j = self._vidx[e], self._vidx[e + 1]
            if j - i > 1:
                out.append(self._sign * s)
        out.append(float(self._deriv(self.xs[0])))
        out.append(float(self._deriv(self.xs[-1])))
        return np.unique(np.asarray(out, dtype=float))


# ---------------------------------------------------------------------------
# construction


def _chain_lower(xs: list, gs: list) -> list:
    """Monotone chain for the lower hull of a graph; collinear interior
    points are dropped, so affine runs become single edges."""
    out: list[int] = []
    for i in range(len(xs)):
        while len(out) >= 2:
            i0, i1 = out[-2], out[-1]
            lhs = (gs[i1] - gs[i0]) * (xs[i] - xs[i1])
            rhs = (gs[i] - gs[i1]) * (xs[i1] - xs[i0])
            if lhs >= rhs:
                out.pop()
            else:
                break
        out.append(i)
    return out


def _tangency_point(gder, w: float, b_lo: float, b_mid: float, b_hi: float) -> float:
    """Solve gder(x) = w near b_mid; endpoints win when the sign allows."""
    d_mid = gder(b_mid) - w
    if d_mid == 0.0:
        return b_mid
    if d_mid > 0.0:
        lo, hi = b_lo, b_mid
        if lo >= hi or gder(lo) - w >= 0.0:
            return lo
    else:
        lo, hi = b_mid, b_hi
        if lo >= hi or gder(hi) - w <= 0.0:
            return hi
    return float(brentq(lambda t: gder(t) - w, lo, hi, xtol=1e-15, rtol=8.9e-16))


def _refine_bridges(xs: np.ndarray, gs: np.ndarray, vidx: list,
                    geval, gder) -> list:
    """Polish bridge endpoints by the common-tangent conditions.

    Returns new knots (tangency abscissae) to insert.  A bridge whose
    endpoint sits on the domain boundary keeps that endpoint fixed.
    """
    n = len(xs)
    span = float(xs[-1] - xs[0])
    new_pts: list[float] = []
    for a_i, b_i in zip(vidx, vidx[1:]):
        if b_i - a_i <= 1:
            continue
        left_free = a_i > 0
        right_free = b_i < n - 1
        if not (left_free or right_free):
            continue
        x1, x2 = float(xs[a_i]), float(xs[b_i])
        f1, f2 = float(gs[a_i]), float(gs[b_i])
        lo1 = float(xs[a_i - 1]) if left_free else x1
        hi1 = float(xs[a_i + 1])
        lo2 = float(xs[b_i - 1])
        hi2 = float(xs[b_i + 1]) if right_free else x2
        for _ in range(60):
            s = (f2 - f1) / (x2 - x1)
            x1_new, x2_new = x1, x2
            if left_free:
                x1_new = _tangency_point(gder, s, lo1, x1, min(hi1, x2 - 1e-15 * span))
                f1 = float(geval(x1_new))
            if right_free:
                x2_new = _tangency_point(gder, s, max(lo2, x1 + 1e-15 * span), x2, hi2)
                f2 = float(geval(x2_new))
            moved = abs(x1_new - x1) + abs(x2_new - x2)
            x1, x2 = x1_new, x2_new
            if moved <= 1e-14 * span:
                break
        for p in (x1, x2):
            k = int(np.searchsorted(xs, p))
            near = min(abs(p - xs[k - 1]) if k > 0 else math.inf,
                       abs(p - xs[k]) if k < n else math.inf)
            if near > 1e-12 * span:
                new_pts.append(p)
    return new_pts


def _build(xs, fs, evaluator, derivative, derivative_inverse, kind: str,
           finite: bool = False) -> Envelope:
    xs = np.ascontiguousarray(xs, dtype=float)
    fs = np.ascontiguousarray(fs, dtype=float)
    if xs.ndim != 1 or xs.shape != fs.shape:
        raise InvalidParameter("xs and fs must be 1-d arrays of equal length")
    if len(xs) < 2:
        raise DegenerateGrid("need at least two sample points")
    if np.any(np.diff(xs) <= 0.0):
        raise InvalidParameter("sample knots must be strictly increasing")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(fs))):
        raise InvalidParameter("samples must be finite")

    sign = 1.0 if kind == "convex" else -1.0
    geval = gder = None
    if evaluator is not None:
        geval = (lambda t: float(evaluator(t))) if sign > 0 else (lambda t: -float(evaluator(t)))
    if derivative is not None:
        gder = (lambda t: float(derivative(t))) if sign > 0 else (lambda t: -float(derivative(t)))

    gs = sign * fs
    vidx = _chain_lower(xs.tolist(), gs.tolist())
    if geval is not None and gder is not None:
        new_pts = _refine_bridges(xs, gs, vidx, geval, gder)
        if new_pts:
            add = np.asarray(sorted(set(new_pts)), dtype=float)
            pos = np.searchsorted(xs, add)
            xs = np.insert(xs, pos, add)
            gs = np.insert(gs, pos, [geval(p) for p in add])
            fs = sign * gs
            vidx = _chain_lower(xs.tolist(), gs.tolist())

    vidx_arr = np.asarray(vidx, dtype=np.intp)
    vx = xs[vidx_arr]
    vg = gs[vidx_arr]
    hull_g = np.interp(xs, vx, vg)
    hull = sign * hull_g

    rng = float(fs.max() - fs.min())
    tol = 1e-9 * (rng if rng > 0.0 else max(1.0, float(np.abs(fs).max())))
    contact = np.abs(hull - fs) <= tol
    contact[vidx_arr] = True

    es = np.diff(vg) / np.diff(vx)
    slope_tol = 1e-9 * (float(np.abs(es).max()) + 1.0) if len(es) else 0.0
    segments: list[AffineSegment] = []
    e = 0
    while e < len(es):
        j = e
        while j + 1 < len(es) and abs(es[j + 1] - es[e]) <= slope_tol:
            j += 1
        segments.append(AffineSegment(float(sign * es[e]), float(vx[e]), float(vx[j + 1])))
        e = j + 1

    dinv = None
    if derivative_inverse is not None:
        # oriented: solve g'(x) = w, where g = sign*f, so f'(x) = sign*w
        dinv = derivative_inverse if sign > 0 else (lambda w: derivative_inverse(-np.asarray(w)))

    return Envelope(kind=kind, xs=xs, f=fs, hull=hull, contact=contact,
                    segments=segments, _sign=sign, _vidx=vidx_arr, _vg=vg,
                    _es=es, _eval=evaluator, _deriv=derivative, _dinv=dinv,
                    finite_support=finite)


def convex_hull(xs, fs, *, evaluator=None, derivative=None,
                derivative_inverse=None, finite=False) -> Envelope:
    """Greatest convex minorant of the sampled curve.

    finite marks xs as the only admissible points rather than samples of
    a continuum.
    """
    return _build(xs, fs, evaluator, derivative, derivative_inverse,
                  "convex", finite)


def concave_hull(xs, fs, *, evaluator=None, derivative=None,
                 derivative_inverse=None, finite=False) -> Envelope:
    """Least concave majorant of the sampled curve."""
    return _build(xs, fs, evaluator, derivative, derivative_inverse,
                  "concave", finite)


# ---------------------------------------------------------------------------
# conjugates


def _kernel_grid(env: Envelope, ws: np.ndarray) -> np.ndarray:
    """sup_x { x w - g(x) } for arrays of w (piecewise-linear data only)."""
    vx = env.xs[env._vidx]
    idx = np.searchsorted(env._es, ws)
    return vx[idx] * ws - env._vg[idx]


def _kernel(env: Envelope, w: float, refine: bool) -> ConjugateValue:
    """sup_x { x w - g(x) } with attaining-set endpoints."""
    vx = env.xs[env._vidx]
    es = env._es
    idx = int(np.searchsorted(es, w))
    span_tol = 1e-9 * max(1.0, abs(w))
    lo_i = hi_i = idx
    if idx < len(es) and abs(es[idx] - w) <= span_tol:
        hi_i = idx + 1
    if idx > 0 and abs(es[idx - 1] - w) <= span_tol:
        lo_i = idx - 1

    if lo_i != hi_i and refine and env.refinable \
            and env._vidx[hi_i] - env._vidx[lo_i] == 1:
        # a tie across a single sample cell of a smooth arc is a sampling
        # artifact, not a true flat; fall through to point refinement
        lo_i = hi_i = idx

    if lo_i != hi_i:
        # w ties an affine piece: the whole edge attains
        x_lo, x_hi = float(vx[lo_i]), float(vx[hi_i])
        val = max(x_lo * w - float(env._vg[lo_i]), x_hi * w - float(env._vg[hi_i]))
        return ConjugateValue(val, x_lo, x_hi)

    x_star = float(vx[idx])
    val = x_star * w - float(env._vg[idx])
    if refine and env.refinable:
        p = int(env._vidx[idx])
        sgn = env._sign
        gder = (lambda t: float(env._deriv(t))) if sgn > 0 else (lambda t: -float(env._deriv(t)))
        b_lo = float(env.xs[p - 1]) if p > 0 else x_star
        b_hi = float(env.xs[p + 1]) if p < len(env.xs) - 1 else x_star
        x_ref = _tangency_point(gder, w, b_lo, x_star, b_hi)
        g_ref = sgn * float(env._eval(x_ref))
        v_ref = x_ref * w - g_ref
        if v_ref >= val:
            x_star, val = x_ref, v_ref
    return ConjugateValue(val, x_star, x_star)


def fenchel_cost(env: Envelope, z: float, *, refine: bool = True) -> ConjugateValue:
    """sup_a { a z - C(a) } over the convex envelope of the cost."""
    if env.kind != "convex":
        raise InvalidParameter("cost conjugate needs a convex envelope")
    return _kernel(env, float(z), refine)


def fenchel_revenue(env: Envelope, z: float, *, refine: bool = True) -> ConjugateValue:
    """sup_q { R(q) - q z } over the concave envelope of the revenue."""
    if env.kind != "concave":
        raise InvalidParameter("revenue conjugate needs a concave envelope")
    return _kernel(env, -float(z), refine)


def fenchel_cost_grid(env: Envelope, zs) -> np.ndarray:
    if env.kind != "convex":
        raise InvalidParameter("cost conjugate needs a convex envelope")
    return _kernel_grid(env, np.asarray(zs, dtype=float))


def fenchel_revenue_grid(env: Envelope, zs) -> np.ndarray:
    if env.kind != "concave":
        raise InvalidParameter("revenue conjugate needs a concave envelope")
    return _kernel_grid(env, -np.asarray(zs, dtype=float))


def _argmax_grid(env: Envelope, ws: np.ndarray, side: str) -> np.ndarray:
    """Vectorized maximizer of x*w - g(x).  Where w ties an edge slope
    exactly, side='left' picks the lower vertex and side='right' the upper.
    Off ties the maximizer is polished through the analytic derivative
    inverse when the curve carries one; the polish is confined to the
    sample cell around the discrete argmax, so a wrong branch is rejected
    rather than trusted."""
    vx = env.xs[env._vidx]
    idx = np.searchsorted(env._es, ws, side=side)
    x0 = vx[idx]
    if env._dinv is None:
        return x0
    p = env._vidx[idx]
    lo = env.xs[np.maximum(p - 1, 0)]
    hi = env.xs[np.minimum(p + 1, len(env.xs) - 1)]
    xr = np.asarray(env._dinv(ws), dtype=float)
    ok = np.isfinite(xr) & (xr > lo) & (xr < hi)
    return np.where(ok, xr, x0)


def cost_argmax_grid(env: Envelope, zs, side: str = "left") -> np.ndarray:
    """Maximizers of a*z - C(a); side resolves exact slope ties."""
    if env.kind != "convex":
        raise InvalidParameter("cost argmax needs a convex envelope")
    return _argmax_grid(env, np.asarray(zs, dtype=float), side)


def revenue_argmax_grid(env: Envelope, zs, side: str = "left") -> np.ndarray:
    """Maximizers of R(q) - q*z; side='left' picks the smaller q at ties."""
    if env.kind != "concave":
        raise InvalidParameter("revenue argmax needs a concave envelope")
    # w = -z reverses nothing in x order, so tie sides carry over directly
    return _argmax_grid(env, -np.asarray(zs, dtype=float), side)


def contact_argmax_intervals(env: Envelope, z: float, *, refine: bool = True) -> list:
    """Maximizers of the conjugate objective over the original curve.

    Returns closed intervals [lo, hi] (degenerate for isolated points).
    Inside the attaining set of the envelope the original curve attains
    exactly at contact points, so bridges contribute their two endpoints
    while true affine runs contribute the whole run.
    """
    cv = fenchel_cost(env, z, refine=refine) if env.kind == "convex" \
        else fenchel_revenue(env, z, refine=refine)
    if cv.argmax_lo == cv.argmax_hi:
        return [(cv.argmax_lo, cv.argmax_hi)]
    i = int(np.searchsorted(env.xs, cv.argmax_lo))
    j = int(np.searchsorted(env.xs, cv.argmax_hi, side="right")) - 1
    out = []
    run_start = None
    prev = None
    for k in range(i, j + 1):
        if env.contact[k]:
            if run_start is None:
                run_start = float(env.xs[k])
            prev = float(env.xs[k])
        else:
            if run_start is not None:
                out.append((run_start, prev))
                run_start = None
    if run_start is not None:
        out.append((run_start, prev))
    return out


# ---------------------------------------------------------------------------
# decomposition


def hull_decompose(env: Envelope, x: float) -> tuple:
    """Express x as a two-point mixture of contact points.

    Returns (x1, x2, delta) with x = delta*x1 + (1-delta)*x2 and
    hull(x) = delta*f(x1) + (1-delta)*f(x2).  Where the envelope touches
    the curve the mixture collapses to (x, x, 1).
    """
    lo, hi = env.domain
    if not (lo - 1e-12 * max(1.0, abs(lo)) <= x <= hi + 1e-12 * max(1.0, abs(hi))):
        raise OutOfDomain(f"{x} outside [{lo}, {hi}]")
    x = float(min(max(x, lo), hi))

    e = env._edge_of(x)
    if e is None or not (env.finite_support or env._edge_is_bridge(e)):
        return (x, x, 1.0)

    i, j = int(env._vidx[e]), int(env._vidx[e + 1])
    ks = np.nonzero(env.contact[i:j + 1])[0] + i
    left = ks[env.xs[ks] <= x]
    right = ks[env.xs[ks] >= x]
    x1 = float(env.xs[left[-1]]) if len(left) else float(env.xs[i])
    x2 = float(env.xs[right[0]]) if len(right) else float(env.xs[j])
    if x1 == x2:
        return (x, x, 1.0)
    delta = (x2 - x) / (x2 - x1)
    mix = delta * float(env.f[int(np.searchsorted(env.xs, x1))]) \
        + (1.0 - delta) * float(env.f[int(np.searchsorted(env.xs, x2))])
    if abs(mix - env.hull_exact(x)) > 1e3 * env.value_tol:
        raise DecompositionMismatch(
            f"mixture value {mix:.12g} vs envelope {env.hull_exact(x):.12g} at x={x:.12g}")
    return (x1, x2, float(delta))
