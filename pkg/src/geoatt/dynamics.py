"""Rigid-body attitude dynamics, disturbance models and Lie-group integrators."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import DomainInvalid
from .so3 import exp_so3, hat, project_so3

__all__ = [
    "BodyState",
    "InertiaMatrix",
    "DisturbanceModel",
    "GravityMoment",
    "omega_dot",
    "step",
    "make_benchmark_disturbances",
    "INTEGRATORS",
]

log = logging.getLogger("geoatt.dynamics")

INTEGRATORS = ("rk4_project", "lie_euler", "lie_rk4")


@dataclass
class BodyState:
    """Attitude R (body to inertial) and body-frame angular velocity Omega."""

    R: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float)
        self.Omega = np.asarray(self.Omega, dtype=float)


class InertiaMatrix:
    """Symmetric positive-definite inertia with cached inverse and eigen range."""

    def __init__(self, J):
        J = np.asarray(J, dtype=float)
        if J.shape != (3, 3):
            raise DomainInvalid(f"inertia must be 3x3, got {J.shape}")
        if np.linalg.norm(J - J.T) > 1e-12:
            raise DomainInvalid("inertia must be symmetric")
        eig = np.linalg.eigvalsh(J)
        if eig[0] <= 0.0:
            raise DomainInvalid(f"inertia must be positive definite, eigs {eig}")
        self.J = J
        self.J_inv = np.linalg.inv(J)
        self.lambda_m = float(eig[0])
        self.lambda_M = float(eig[-1])

    def __matmul__(self, v):
        return self.J @ v


@dataclass
class DisturbanceModel:
    """Matched disturbance W(R, Omega) Delta(t) with known bounds.

    ``Delta`` maps time to a p-vector; ``W`` maps (R, Omega) to a 3 x p
    matrix.  Bound overruns are logged as warnings, not errors: the bounds
    are analysis inputs rather than physical limits.
    """

    kind: str = "none"
    Delta: Callable[[float], np.ndarray] = lambda t: np.zeros(3)
    W: Callable[[np.ndarray, np.ndarray], np.ndarray] = lambda R, Omega: np.eye(3)
    B_W: float = 10.0
    B_Delta: float = 10.0
    p: int = 3
    identity_W: bool = True  # True when W is the identity (enables fast path)

    _warned: bool = field(default=False, repr=False)

    def evaluate(self, R, Omega, t):
        """Return (W, Delta) at the given state and time, checking bounds."""
        w = np.asarray(self.W(R, Omega), dtype=float)
        d = np.asarray(self.Delta(t), dtype=float)
        if not self._warned and (
            np.linalg.norm(w, 2) > self.B_W or np.linalg.norm(d) > self.B_Delta
        ):
            log.warning("disturbance exceeded its declared bound at t=%.4f", t)
            self._warned = True
        return w, d


@dataclass(frozen=True)
class GravityMoment:
    """Gravity moment r_cg x m g R' e3 of a body pivoting below its mass center."""

    r_cg: np.ndarray
    m: float
    g: float = 9.81

    def moment(self, R) -> np.ndarray:
        e3 = np.array([0.0, 0.0, 1.0])
        return np.cross(np.asarray(self.r_cg, dtype=float), self.m * self.g * (R.T @ e3))


def omega_dot(
    state: BodyState,
    u,
    J: InertiaMatrix,
    dist: Optional[DisturbanceModel],
    t: float,
    grav: Optional[GravityMoment] = None,
) -> np.ndarray:
    """Angular acceleration J^-1 (-Omega x J Omega + u + W Delta [+ M_g])."""
    omega = state.Omega
    torque = np.asarray(u, dtype=float) - np.cross(omega, J.J @ omega)
    if dist is not None and dist.kind != "none":
        w, d = dist.evaluate(state.R, omega, t)
        torque = torque + w @ d
    if grav is not None:
        torque = torque + grav.moment(state.R)
    return J.J_inv @ torque


def _dexpinv(sigma, omega):
    """Inverse right-trivialized tangent of exp on so(3), to second order."""
    c1 = np.cross(sigma, omega)
    return omega - 0.5 * c1 + np.cross(sigma, c1) / 12.0


def step(
    state: BodyState,
    u,
    J: InertiaMatrix,
    dist: Optional[DisturbanceModel],
    t: float,
    dt: float,
    method: str = "lie_rk4",
) -> BodyState:
    """Advance one step with the control held constant over [t, t + dt].

    ``lie_*`` methods update the attitude multiplicatively through the
    exponential map; ``rk4_project`` integrates R componentwise and repairs
    drift with the polar projection.
    """
    if dt <= 0.0:
        raise DomainInvalid(f"dt must be positive, got {dt}")
    if method == "lie_euler":
        wdot = omega_dot(state, u, J, dist, t)
        return BodyState(
            R=state.R @ exp_so3(dt * state.Omega),
            Omega=state.Omega + dt * wdot,
        )
    if method == "lie_rk4":
        return _step_lie_rk4(state, u, J, dist, t, dt)
    if method == "rk4_project":
        return _step_rk4_project(state, u, J, dist, t, dt)
    raise DomainInvalid(f"unknown integrator {method!r}")


def _step_lie_rk4(state, u, J, dist, t, dt):
    # RK4 in the chart R(s) = R0 exp(sigma(s)^), sigma' = dexpinv(sigma, Omega)
    R0 = state.R

    def rates(sigma, omega, tau):
        st = BodyState(R=R0 @ exp_so3(sigma), Omega=omega)
        return _dexpinv(sigma, omega), omega_dot(st, u, J, dist, tau)

    s1, w1 = rates(np.zeros(3), state.Omega, t)
    s2, w2 = rates(0.5 * dt * s1, state.Omega + 0.5 * dt * w1, t + 0.5 * dt)
    s3, w3 = rates(0.5 * dt * s2, state.Omega + 0.5 * dt * w2, t + 0.5 * dt)
    s4, w4 = rates(dt * s3, state.Omega + dt * w3, t + dt)

    sigma = dt / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
    omega = state.Omega + dt / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
    return BodyState(R=R0 @ exp_so3(sigma), Omega=omega)


def _step_rk4_project(state, u, J, dist, t, dt):
    def rates(R, omega, tau):
        st = BodyState(R=R, Omega=omega)
        return R @ hat(omega), omega_dot(st, u, J, dist, tau)

    R0, w0 = state.R, state.Omega
    r1, w1 = rates(R0, w0, t)
    r2, w2 = rates(R0 + 0.5 * dt * r1, w0 + 0.5 * dt * w1, t + 0.5 * dt)
    r3, w3 = rates(R0 + 0.5 * dt * r2, w0 + 0.5 * dt * w2, t + 0.5 * dt)
    r4, w4 = rates(R0 + dt * r3, w0 + dt * w3, t + dt)

    R = R0 + dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4)
    omega = w0 + dt / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
    return BodyState(R=project_so3(R), Omega=omega)


def make_benchmark_disturbances() -> tuple[DisturbanceModel, DisturbanceModel]:
    """The two benchmark disturbances: constant and constant-plus-sinusoid (N m)."""
    base = np.array([0.2, 0.2, 0.2])

    constant = DisturbanceModel(
        kind="constant",
        Delta=lambda t: base,
        B_W=1.0,
        B_Delta=float(np.linalg.norm(base)) * 1.01,
    )

    def time_varying(t):
        s, c = np.sin(9.0 * t), np.cos(9.0 * t)
        return base + 0.02 * np.array([s, c, 0.5 * (s + c)])

    varying = DisturbanceModel(
        kind="time_varying",
        Delta=time_varying,
        B_W=1.0,
        B_Delta=float(np.linalg.norm(base + 0.02 * np.sqrt(2))) * 1.01,
    )
    return constant, varying
