"""Shared fixtures: the worked example instances, solved once per session."""

import pathlib

import numpy as np
import pytest

from monopoly_control import (
    ControlSet,
    Curve,
    ProblemSpec,
    build_hamiltonian,
    build_value,
    builtin_arvan_moses,
    builtin_linear_cost,
    validate_problem,
)

REPO = pathlib.Path(__file__).resolve().parents[1]


def random_table_instance(rng: np.random.Generator):
    """A random bounded problem with tabulated revenue and cost curves.

    Revenue is any non-negative table anchored at zero (not necessarily
    concave), cost any non-decreasing one, so the hull machinery gets
    exercised rather than bypassed.
    """
    beta = float(rng.uniform(0.3, 1.5))
    q_hi = float(rng.uniform(0.5, 2.0))
    a_hi = float(rng.uniform(0.5, 2.5))

    n_r = int(rng.integers(4, 10))
    r_xs = np.concatenate([[0.0], np.sort(rng.uniform(0.0, q_hi, n_r - 2)),
                           [q_hi]])
    r_xs = np.unique(r_xs)
    r_ys = np.concatenate([[0.0], rng.uniform(0.0, 1.2, len(r_xs) - 1)])

    n_c = int(rng.integers(4, 10))
    c_xs = np.concatenate([[0.0], np.sort(rng.uniform(0.0, a_hi, n_c - 2)),
                           [a_hi]])
    c_xs = np.unique(c_xs)
    c_ys = np.concatenate([[0.0],
                           np.cumsum(rng.uniform(0.0, 0.6, len(c_xs) - 1))])

    if rng.uniform() < 0.25:
        vals = np.unique(np.concatenate([[0.0],
                                         rng.uniform(0.0, a_hi, 4)]))
        production = ControlSet.finite(vals) if len(vals) >= 2 \
            else ControlSet.interval(0.0, a_hi)
    else:
        production = ControlSet.interval(0.0, a_hi)

    spec = ProblemSpec(
        beta=beta,
        demand_set=ControlSet.interval(0.0, q_hi),
        production_set=production,
        revenue=Curve.table(list(zip(r_xs, r_ys))),
        cost=Curve.table(list(zip(c_xs, c_ys))),
        grid_n=257,
    )
    return validate_problem(spec)


@pytest.fixture(scope="session")
def make_random_instance():
    return random_table_instance


@pytest.fixture(scope="session")
def configs_dir():
    return REPO / "configs"


@pytest.fixture(scope="session")
def linear_cost_problem():
    """Affine cost c=0.2, A=[0,0.3], R(q)=q(1-q) on [0,1], beta=0.5."""
    return validate_problem(builtin_linear_cost(
        0.2, 0.3, 1.0, Curve.linear_demand_revenue(1.0, 1.0), beta=0.5))


@pytest.fixture(scope="session")
def linear_cost_model(linear_cost_problem):
    return build_hamiltonian(linear_cost_problem)


@pytest.fixture(scope="session")
def linear_cost_value(linear_cost_model):
    return build_value(linear_cost_model)


@pytest.fixture(scope="session")
def am_mid_problem():
    """Cubic cost K=1 on a ray, R(q)=q(1-q), beta=0.5: the mixing case."""
    return validate_problem(builtin_arvan_moses(1.0, 1.0, 1.0, beta=0.5))


@pytest.fixture(scope="session")
def am_mid_model(am_mid_problem):
    return build_hamiltonian(am_mid_problem)


@pytest.fixture(scope="session")
def am_mid_value(am_mid_model):
    return build_value(am_mid_model)


@pytest.fixture(scope="session")
def am_low_problem():
    return validate_problem(builtin_arvan_moses(0.2, 1.0, 1.0, beta=0.5))


@pytest.fixture(scope="session")
def am_low_model(am_low_problem):
    return build_hamiltonian(am_low_problem)


@pytest.fixture(scope="session")
def am_high_problem():
    return validate_problem(builtin_arvan_moses(4.0, 0.5, 1.0, beta=0.5))


@pytest.fixture(scope="session")
def am_high_model(am_high_problem):
    return build_hamiltonian(am_high_problem)
