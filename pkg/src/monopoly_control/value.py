"""Value function of the stock-constrained problem.

With zeta > 0 the value function never touches its own formula directly:
it is the composition v(x) = H(xi(x)) / beta where xi(x) inverts the
state-to-slope map

    Psi(xi) = -integral_xi^zeta H'(z) / (beta z) dz,

so Psi(xi) is the stock level at which the marginal value of inventory has
fallen to xi.  H' is negative on (0, zeta), making Psi increasing as xi
decreases; v is then increasing, concave, and capped by H(0)/beta.  With
zeta = 0 holding stock is pointless and v is the constant H(0)/beta.

Psi is integrated cell by cell with Simpson's rule on a geometric slope
grid refined by the kink slopes of H', using the one-sided derivative that
points into each cell at its edges; the inversion xi(x) runs a bracketed
root search inside the unique cell containing x.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameter, OutOfDomain
from .hamiltonian import (
    HamiltonianModel,
    deriv_minus_grid,
    deriv_plus_grid,
    h_at,
    subgradient,
)
from .tableio import write_csv


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """Value of the control problem as a function of initial stock.

    xi_knots run from zeta down to the resolved slope floor; psi_knots are
    the matching stock levels (increasing from 0).  Beyond the last knot
    the marginal value has decayed below zeta times the floor ratio and is
    clamped there, which perturbs the value by an invisible amount.
    """

    model: HamiltonianModel = field(repr=False)
    beta: float
    constant: bool
    v_flat: float
    zeta: float
    xi_knots: np.ndarray = field(repr=False)
    psi_knots: np.ndarray = field(repr=False)

    @property
    def x_resolved(self) -> float:
        """Stock level up to which the slope table resolves v'."""
        return 0.0 if self.constant else float(self.psi_knots[-1])

    def psi(self, xi: float) -> float:
        """Stock level at which the marginal value equals xi."""
        if self.constant:
            raise InvalidParameter("flat value function has no slope map")
        xi = float(xi)
        if xi > self.zeta or xi < self.xi_knots[-1] * (1.0 - 1e-12):
            raise OutOfDomain(
                f"slope {xi} outside resolved range "
                f"[{self.xi_knots[-1]}, {self.zeta}]")
        xi = min(max(xi, float(self.xi_knots[-1])), self.zeta)
        k = len(self.xi_knots) - 1 - np.searchsorted(self.xi_knots[::-1], xi,
                                                     side="left")
        k = int(k)
        if k < 0:
            return 0.0
        if xi == self.xi_knots[k]:
            return float(self.psi_knots[k])
        # xi sits strictly inside the cell (xi_knots[k+1], xi_knots[k])
        return float(self.psi_knots[k]
                     + _cell_integral(self.model, self.beta, xi,
                                      float(self.xi_knots[k])))

    def v_prime(self, x: float) -> float:
        """Marginal value of stock; decreasing, v'(0) = zeta."""
        x = float(x)
        if x < 0.0:
            raise OutOfDomain("stock must be non-negative")
        if self.constant:
            return 0.0
        if x == 0.0:
            return self.zeta
        if x >= self.psi_knots[-1]:
            return float(self.xi_knots[-1])
        k = int(np.searchsorted(self.psi_knots, x))
        if self.psi_knots[k] == x:
            return float(self.xi_knots[k])
        lo_xi = float(self.xi_knots[k])
        hi_xi = float(self.xi_knots[k - 1])
        base = float(self.psi_knots[k - 1])

        def gap(xi: float) -> float:
            return base + _cell_integral(self.model, self.beta, xi, hi_xi) - x

        # defensive against last-bit disagreement with the tabulated knots
        if gap(lo_xi) < 0.0:
            return lo_xi
        if gap(hi_xi) > 0.0:
            return hi_xi
        return float(brentq(gap, lo_xi, hi_xi, xtol=1e-15, rtol=8.9e-16))

    def v_prime_table(self, xs) -> np.ndarray:
        """Piecewise-linear bulk approximation of v' (knot-exact)."""
        xs = np.asarray(xs, dtype=float)
        if self.constant:
            return np.zeros_like(xs)
        return np.interp(xs, self.psi_knots, self.xi_knots)

    def value_at(self, x: float) -> float:
        if self.constant:
            if x < 0.0:
                raise OutOfDomain("stock must be non-negative")
            return self.v_flat
        return float(h_at(self.model, self.v_prime(x))) / self.beta


def _cell_integral(model: HamiltonianModel, beta: float,
                   z_lo: float, z_hi: float) -> float:
    """Simpson integral of -H'(z)/(beta z) over one kink-free cell."""
    if z_hi <= z_lo:
        return 0.0
    g_lo = -subgradient(model, z_lo)[1] / (beta * z_lo)
    g_hi = -subgradient(model, z_hi)[0] / (beta * z_hi)
    z_mid = 0.5 * (z_lo + z_hi)
    d_lo, d_hi = subgradient(model, z_mid)
    g_mid = -0.5 * (d_lo + d_hi) / (beta * z_mid)
    val = (z_hi - z_lo) / 6.0 * (max(g_lo, 0.0) + 4.0 * max(g_mid, 0.0)
                                 + max(g_hi, 0.0))
    return max(val, 0.0)


def build_value(model: HamiltonianModel, *, n_xi: int = 2000,
                xi_floor_ratio: float = 1e-6) -> ValueFunction:
    """Tabulate Psi on a refined slope grid and wrap the inversion."""
    beta = model.problem.beta
    zeta = model.zeta
    if zeta <= 0.0:
        v_flat = float(h_at(model, 0.0)) / beta
        return ValueFunction(model=model, beta=beta, constant=True,
                             v_flat=v_flat, zeta=0.0,
                             xi_knots=np.empty(0), psi_knots=np.empty(0))

    if n_xi < 16:
        raise InvalidParameter("slope grid too coarse to trust")
    if not (0.0 < xi_floor_ratio < 1.0):
        raise InvalidParameter("floor ratio must lie in (0, 1)")

    xi = np.geomspace(zeta, zeta * xi_floor_ratio, n_xi)
    inner = model.kink_zs
    inner = inner[(inner > xi[-1]) & (inner < zeta)]
    if len(inner):
        xi = np.unique(np.concatenate([xi, inner]))[::-1]
        keep = np.ones(len(xi), dtype=bool)
        keep[1:] = np.abs(np.diff(xi)) > 1e-13 * xi[:-1]
        xi = xi[keep]

    # vectorized Simpson per cell; edges take the one-sided derivative
    # pointing into the cell, midpoints are kink-free by construction
    asc = xi[::-1]
    g_plus = -deriv_plus_grid(model, asc) / (beta * asc)
    g_minus = -deriv_minus_grid(model, asc) / (beta * asc)
    mids = 0.5 * (asc[:-1] + asc[1:])
    g_mid = -0.5 * (deriv_plus_grid(model, mids)
                    + deriv_minus_grid(model, mids)) / (beta * mids)
    w = np.diff(asc)
    cells = w / 6.0 * (np.maximum(g_plus[:-1], 0.0)
                       + 4.0 * np.maximum(g_mid, 0.0)
                       + np.maximum(g_minus[1:], 0.0))
    cells = np.maximum(cells, 0.0)
    # psi accumulates from zeta (asc[-1]) downward through the cells
    psi = np.concatenate([[0.0], np.cumsum(cells[::-1])])

    return ValueFunction(model=model, beta=beta, constant=False,
                         v_flat=float(h_at(model, 0.0)) / beta, zeta=zeta,
                         xi_knots=xi, psi_knots=psi)


def hjb_residual(value_fn, model: HamiltonianModel, x: float,
                 step: float = 1e-6) -> float:
    """Relative defect of beta*v = H(v') using a numerical slope.

    value_fn is anything exposing value_at (this module's ValueFunction or
    the dynamic-programming oracle's adapter); the slope comes from a
    central difference so the check does not reuse the internal inversion.
    """
    v_at = value_fn.value_at if hasattr(value_fn, "value_at") else value_fn
    h = step * max(1.0, abs(x))
    if x >= h:
        dv = (v_at(x + h) - v_at(x - h)) / (2.0 * h)
    else:
        dv = (v_at(x + h) - v_at(max(x, 0.0))) / h
    dv = min(max(dv, 0.0), model.zeta)
    lhs = model.problem.beta * v_at(x)
    return abs(lhs - float(h_at(model, dv))) / max(1.0, abs(lhs))


def write_value_csv(vf: ValueFunction, path) -> None:
    """Knot-exact table: stock, value, marginal value."""
    if vf.constant:
        xs = np.array([0.0, 1.0])
        vs = np.array([vf.v_flat, vf.v_flat])
        ds = np.zeros(2)
    else:
        xs = vf.psi_knots
        ds = vf.xi_knots
        vs = np.array([h_at(vf.model, float(z)) for z in ds]) / vf.beta
    write_csv(path, ["x", "v", "v_prime"], [xs, vs, ds])
