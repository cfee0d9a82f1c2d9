"""Production and pricing strategies for a discounted inventory problem.

A monopolist produces at rate a in A and sells at rate q in Q, holding a
non-negative stock; profit is discounted revenue minus discounted cost.
This package computes the value function of that control problem, decides
whether a constant production-equals-sales rate is optimal, builds relaxed
(mixed-rate) and near-optimal cyclic strategies when it is not, and checks
everything against a brute-force dynamic-programming oracle.
"""

from .errors import (
    AssumptionViolation,
    CoercivityUndetectable,
    DecompositionMismatch,
    DegenerateGrid,
    HorizonTooShort,
    InvalidParameter,
    MonopolyControlError,
    NotConverged,
    OutOfDomain,
    StateViolation,
    TruncationFailed,
    ZetaZeroWarning,
)
from .problem import (
    ControlSet,
    Curve,
    ProblemSpec,
    ValidatedProblem,
    builtin_arvan_moses,
    builtin_linear_cost,
    validate_problem,
)
from .envelope import (
    AffineSegment,
    ConjugateValue,
    Envelope,
    concave_hull,
    contact_argmax_intervals,
    convex_hull,
    fenchel_cost,
    fenchel_cost_grid,
    fenchel_revenue,
    fenchel_revenue_grid,
    hull_decompose,
)
from .hamiltonian import (
    HamiltonianModel,
    build_hamiltonian,
    controls_at,
    h_at,
    subgradient,
)
from .value import (
    ValueFunction,
    build_value,
    hjb_residual,
    write_value_csv,
)
from .strategy import (
    AMReference,
    CyclicPlan,
    DrawdownPlan,
    LinearCostReference,
    RelaxedStatic,
    StaticPlan,
    StaticReport,
    arvan_moses_reference,
    convexified_static,
    cyclic_strategy,
    cyclic_value,
    drawdown_plan,
    linear_cost_reference,
    relaxed_static,
    static_candidate,
    static_optimality_test,
)
from .simulate import (
    Trajectory,
    profit_gap,
    simulate,
    write_trajectory_csv,
)
from .oracle import (
    DPResult,
    brute_conjugate,
    dp_value,
    production_cap,
    write_dp_csv,
)
from .config import load_problem

__all__ = [
    "AMReference",
    "AffineSegment",
    "AssumptionViolation",
    "CoercivityUndetectable",
    "ConjugateValue",
    "ControlSet",
    "Curve",
    "CyclicPlan",
    "DPResult",
    "DecompositionMismatch",
    "DegenerateGrid",
    "DrawdownPlan",
    "Envelope",
    "HamiltonianModel",
    "HorizonTooShort",
    "InvalidParameter",
    "LinearCostReference",
    "MonopolyControlError",
    "NotConverged",
    "OutOfDomain",
    "ProblemSpec",
    "RelaxedStatic",
    "StateViolation",
    "StaticPlan",
    "StaticReport",
    "Trajectory",
    "TruncationFailed",
    "ValidatedProblem",
    "ValueFunction",
    "ZetaZeroWarning",
    "arvan_moses_reference",
    "brute_conjugate",
    "build_hamiltonian",
    "build_value",
    "builtin_arvan_moses",
    "builtin_linear_cost",
    "concave_hull",
    "contact_argmax_intervals",
    "controls_at",
    "convex_hull",
    "convexified_static",
    "cyclic_strategy",
    "cyclic_value",
    "drawdown_plan",
    "dp_value",
    "fenchel_cost",
    "fenchel_cost_grid",
    "fenchel_revenue",
    "fenchel_revenue_grid",
    "h_at",
    "hjb_residual",
    "hull_decompose",
    "linear_cost_reference",
    "load_problem",
    "production_cap",
    "profit_gap",
    "relaxed_static",
    "simulate",
    "static_candidate",
    "static_optimality_test",
    "subgradient",
    "write_dp_csv",
    "write_trajectory_csv",
    "write_value_csv",
]

__version__ = "0.1.0"
