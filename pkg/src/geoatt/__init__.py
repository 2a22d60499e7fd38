"""Geometric attitude control on SO(3) with keep-out-cone constraints.

Simulation library and CLI for a smooth constrained attitude controller and
its adaptive extension: configuration error with logarithmic barriers,
rigid-body dynamics with matched disturbances, Lie-group integrators, and a
closed-loop harness with CSV logging.
"""
from importlib.metadata import PackageNotFoundError, version

from .exceptions import (
    ConstraintViolated,
    Degenerate,
    DomainInvalid,
    GeoAttError,
    InfeasibleGoal,
    NotSkew,
)
from .so3 import (
    Rotation,
    exp_so3,
    hat,
    is_rotation,
    log_so3,
    project_so3,
    vee,
)
from .geometry import (
    AttractiveWeights,
    BarrierShape,
    BoundLedger,
    ConstraintCone,
    attractive_A,
    barrier_B,
    bound_ledger,
    err_vec_eR,
    err_vec_eRA,
    err_vec_eRB,
    estimate_quadratic_bounds,
    hessian_psi_at_goal,
    matrix_E,
    matrix_F,
    psi,
    require_feasible,
)
from .dynamics import (
    BodyState,
    DisturbanceModel,
    GravityMoment,
    InertiaMatrix,
    step,
)
from .control import (
    ControllerParams,
    EstimatorState,
    check_matrices_W1_W2_M,
    control_adaptive,
    control_smooth,
    estimator_rate,
    validate_c,
)
from .sim import (
    Scenario,
    TrajectoryLog,
    euler313_angles,
    euler313_demo,
    euler313_rates,
    euler313_rotation,
    load_scenario,
    make_benchmark_scenarios,
    monitors,
    run,
    scenario_from_dict,
    write_csv,
)

try:
    __version__ = version("geoatt")
except PackageNotFoundError:  # pragma: no cover - not installed
    __version__ = "0+unknown"

__all__ = [
    "GeoAttError", "NotSkew", "Degenerate", "ConstraintViolated",
    "InfeasibleGoal", "DomainInvalid",
    "Rotation", "hat", "vee", "exp_so3", "log_so3", "project_so3",
    "is_rotation",
    "AttractiveWeights", "ConstraintCone", "BarrierShape", "BoundLedger",
    "attractive_A", "barrier_B", "psi", "err_vec_eRA", "err_vec_eRB",
    "err_vec_eR", "matrix_E", "matrix_F", "bound_ledger",
    "hessian_psi_at_goal", "estimate_quadratic_bounds", "require_feasible",
    "BodyState", "InertiaMatrix", "DisturbanceModel", "GravityMoment", "step",
    "ControllerParams", "EstimatorState", "control_smooth", "control_adaptive",
    "estimator_rate", "validate_c", "check_matrices_W1_W2_M",
    "Scenario", "TrajectoryLog", "run", "monitors", "make_benchmark_scenarios",
    "write_csv", "load_scenario", "scenario_from_dict",
    "euler313_rotation", "euler313_angles", "euler313_rates", "euler313_demo",
    "__version__",
]
