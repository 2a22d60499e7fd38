"""Constrained attitude controllers: smooth feedback and adaptive estimator."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import GravityMoment, InertiaMatrix
from .exceptions import ConstraintViolated, DomainInvalid, InfeasibleGoal
from .geometry import (
    AttractiveWeights,
    BarrierShape,
    BoundLedger,
    err_vec_eR,
    require_feasible,
)

__all__ = [
    "ControllerParams",
    "EstimatorState",
    "control_smooth",
    "control_adaptive",
    "estimator_rate",
    "validate_c",
    "check_matrices_W1_W2_M",
]

log = logging.getLogger("geoatt.control")


@dataclass
class ControllerParams:
    kR: float
    kOmega: float
    kDelta: float
    c: float
    G: AttractiveWeights
    alpha: BarrierShape
    J: InertiaMatrix
    mode: str = "adaptive"
    gravity: Optional[GravityMoment] = None

    def __post_init__(self):
        for name in ("kR", "kOmega", "kDelta", "c"):
            if getattr(self, name) <= 0.0:
                raise DomainInvalid(f"{name} must be positive, got {getattr(self, name)}")
        if self.mode not in ("smooth", "adaptive"):
            raise DomainInvalid(f"mode must be smooth or adaptive, got {self.mode!r}")


@dataclass
class EstimatorState:
    """Current disturbance estimate; owned by a single trajectory."""

    delta_bar: np.ndarray

    def __post_init__(self):
        self.delta_bar = np.asarray(self.delta_bar, dtype=float)


def _check_goal_feasible(Rd, r, cones):
    try:
        require_feasible(Rd, r, cones)
    except ConstraintViolated as exc:
        raise InfeasibleGoal(f"desired attitude violates {exc}") from exc


def control_smooth(state, Rd, r, cones, params: ControllerParams) -> np.ndarray:
    """Feedback u = -kR e_R - kOmega e_Omega + Omega x J Omega (- M_g)."""
    _check_goal_feasible(Rd, r, cones)
    e_r = err_vec_eR(state.R, Rd, r, cones, params.G, params.alpha)
    omega = state.Omega
    u = -params.kR * e_r - params.kOmega * omega + np.cross(omega, params.J.J @ omega)
    if params.gravity is not None:
        u = u - params.gravity.moment(state.R)
    return u


def control_adaptive(
    state, est: EstimatorState, Rd, r, cones, dist_W, params: ControllerParams
) -> np.ndarray:
    """Smooth feedback plus cancellation of the estimated disturbance W delta_bar."""
    u = control_smooth(state, Rd, r, cones, params)
    w = np.asarray(dist_W(state.R, state.Omega), dtype=float)
    return u - w @ est.delta_bar


def estimator_rate(
    state, est: EstimatorState, Rd, r, cones, dist_W, params: ControllerParams
) -> np.ndarray:
    """Adaptive update law d/dt delta_bar = kDelta W' (e_Omega + c e_R)."""
    e_r = err_vec_eR(state.R, Rd, r, cones, params.G, params.alpha)
    w = np.asarray(dist_W(state.R, state.Omega), dtype=float)
    return params.kDelta * (w.T @ (state.Omega + params.c * e_r))


def validate_c(params: ControllerParams, ledger: BoundLedger, n1: float):
    """Check the adaptive cross-term gain c against its stability bound.

    Returns (ok, c_max) with
    c_max = min(sqrt(2 lam_m kR n1 / lam_M^2),
                4 kR kOm / (kOm^2 + 4 kR lam_M H)).
    """
    if ledger is None or n1 is None or n1 <= 0.0:
        raise DomainInvalid("ledger and a positive n1 are required")
    lam_m, lam_M = params.J.lambda_m, params.J.lambda_M
    first = np.sqrt(2.0 * lam_m * params.kR * n1 / lam_M**2)
    second = 4.0 * params.kR * params.kOmega / (
        params.kOmega**2 + 4.0 * params.kR * lam_M * ledger.H
    )
    c_max = float(min(first, second))
    ok = 0.0 < params.c < c_max
    if not ok:
        log.warning("c = %.4g outside (0, %.4g)", params.c, c_max)
    return ok, c_max


def check_matrices_W1_W2_M(params: ControllerParams, ledger: BoundLedger, n1, n2):
    """Build the Lyapunov sandwich matrices and report their definiteness.

    W1 and W2 bound the adaptive Lyapunov function below and above in
    (|e_R|, |e_Omega|, |e_Delta|); M bounds its decay rate in
    (|e_R|, |e_Omega|).  Positive definiteness is decided by leading
    principal minors.
    """
    lam_m, lam_M = params.J.lambda_m, params.J.lambda_M
    kR, kOm, kD, c = params.kR, params.kOmega, params.kDelta, params.c
    w1 = np.array([
        [kR * n1, -0.5 * c * lam_M, 0.0],
        [-0.5 * c * lam_M, 0.5 * lam_m, 0.0],
        [0.0, 0.0, 0.5 / kD],
    ])
    w2 = np.array([
        [kR * n2, 0.5 * c * lam_M, 0.0],
        [0.5 * c * lam_M, 0.5 * lam_M, 0.0],
        [0.0, 0.0, 0.5 / kD],
    ])
    m = np.array([
        [kR * c, 0.5 * kOm * c],
        [0.5 * kOm * c, kOm - c * lam_M * ledger.H],
    ])

    def positive_definite(a):
        return all(np.linalg.det(a[:k, :k]) > 0.0 for k in range(1, a.shape[0] + 1))

    return {
        "W1": w1,
        "W2": w2,
        "M": m,
        "W1_positive_definite": positive_definite(w1),
        "W2_positive_definite": positive_definite(w2),
        "M_positive_definite": positive_definite(m),
    }
