"""Discrete-time DP oracle: convergence, policies, guards."""

import numpy as np
import pytest

from monopoly_control import (
    InvalidParameter,
    brute_conjugate,
    dp_value,
    production_cap,
    write_dp_csv,
)


@pytest.fixture(scope="module")
def linear_cost_dp(linear_cost_problem):
    # deliberately coarse so the module tests stay fast; the acceptance
    # suite runs the production resolution
    return dp_value(linear_cost_problem, x_max=0.25, nx=128, dt=0.01, na=33, nq=33)


def test_dp_converges_with_certificate(linear_cost_dp):
    assert linear_cost_dp.fix_gap < 1e-9
    assert linear_cost_dp.iterations > 10


def test_dp_close_to_analytic(linear_cost_dp, linear_cost_value):
    xs = np.linspace(0.0, 0.12, 50)
    err = np.abs(linear_cost_dp.value_at(xs)
                 - np.array([linear_cost_value.value_at(float(x)) for x in xs]))
    assert err.max() < 3e-2


def test_dp_value_monotone(linear_cost_dp):
    assert np.all(np.diff(linear_cost_dp.v_hat) > -1e-12)


def test_dp_policy_sensible_at_origin(linear_cost_dp):
    # with no stock: produce at the cap, throttle sales
    assert linear_cost_dp.policy_produce[0] == pytest.approx(0.3, abs=1e-9)
    assert linear_cost_dp.policy_sell[0] <= 0.3 + 1e-9


def test_dp_value_at_interpolates(linear_cost_dp):
    mid = 0.5 * (linear_cost_dp.x_grid[3] + linear_cost_dp.x_grid[4])
    lo = linear_cost_dp.v_hat[3]
    hi = linear_cost_dp.v_hat[4]
    assert linear_cost_dp.value_at(mid) == pytest.approx(0.5 * (lo + hi), abs=1e-14)


def test_production_cap_am(am_mid_problem):
    cap = production_cap(am_mid_problem)
    # best average revenue is 1 per unit at q -> 0; marginal cost hits 1
    # again at a = 2, so the cap sits a hair above 2
    assert cap == pytest.approx(2.1, rel=1e-3)
    assert cap > 1.5


def test_dp_guards(linear_cost_problem):
    with pytest.raises(InvalidParameter):
        dp_value(linear_cost_problem, x_max=-1.0)
    with pytest.raises(InvalidParameter):
        dp_value(linear_cost_problem, x_max=0.5, dt=0.0)
    with pytest.raises(InvalidParameter):
        # one step would cross the whole grid many times over
        dp_value(linear_cost_problem, x_max=0.01, nx=8, dt=50.0)


def test_brute_conjugate_kinds():
    xs = np.array([0.0, 1.0, 2.0])
    fs = np.array([0.0, 0.5, 2.0])
    val, arg = brute_conjugate(xs, fs, 1.0, "cost")
    assert (val, arg) == (0.5, 1.0)
    val, arg = brute_conjugate(xs, fs, 0.1, "revenue")
    assert (val, arg) == (1.8, 2.0)
    with pytest.raises(InvalidParameter):
        brute_conjugate(xs, fs, 1.0, "other")


def test_write_dp_csv(tmp_path, linear_cost_dp):
    path = tmp_path / "dp.csv"
    write_dp_csv(linear_cost_dp, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,v_hat,produce,sell"
    assert len(lines) == len(linear_cost_dp.x_grid) + 1


def test_dp_bounded_production_equals_ray_under_cap(am_mid_problem,
                                                    am_mid_value):
    # replacing the ray with a bounded interval above the cap must not
    # change the oracle value: the cap rule already covers every rate a
    # rational producer would use
    from monopoly_control.problem import ControlSet, ProblemSpec
    from monopoly_control import validate_problem

    spec = am_mid_problem.spec
    capped = ProblemSpec(
        beta=spec.beta,
        demand_set=spec.demand_set,
        production_set=ControlSet.interval(0.0, production_cap(am_mid_problem)),
        revenue=spec.revenue,
        cost=spec.cost,
        grid_n=spec.grid_n,
    )
    kw = dict(x_max=0.25, nx=96, dt=0.01, na=25, nq=25)
    ray = dp_value(am_mid_problem, **kw)
    box = dp_value(validate_problem(capped), **kw)
    assert np.allclose(ray.v_hat, box.v_hat, atol=1e-12)
