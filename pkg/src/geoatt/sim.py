"""Closed-loop simulation harness: scenarios, stepping, monitors and logging."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .control import ControllerParams, control_adaptive, control_smooth
from .dynamics import (
    BodyState,
    DisturbanceModel,
    GravityMoment,
    InertiaMatrix,
    make_benchmark_disturbances,
)
from .exceptions import ConstraintViolated, DomainInvalid, InfeasibleGoal
from .geometry import (
    AttractiveWeights,
    BarrierShape,
    ConstraintCone,
    require_feasible,
)
from .so3 import exp_so3, is_rotation

__all__ = [
    "Scenario",
    "TrajectoryLog",
    "run",
    "monitors",
    "make_benchmark_scenarios",
    "write_csv",
    "load_scenario",
    "scenario_from_dict",
    "euler313_angles",
    "euler313_rotation",
    "euler313_rates",
    "euler313_demo",
    "EulerSample",
    "SINGULARITY_SIN_TOL",
]

log = logging.getLogger("geoatt.sim")

# waypoint hand-off: advance when the error to the active set point drops
# below this, or its dwell expires
WAYPOINT_PSI_SWITCH = 0.02

SINGULARITY_SIN_TOL = 0.01


@dataclass
class Scenario:
    name: str
    params: ControllerParams
    r: np.ndarray
    cones: list
    R0: np.ndarray
    Rd: np.ndarray
    Omega0: np.ndarray
    disturbance: DisturbanceModel
    waypoints: Optional[list] = None  # list of (rotation, dwell_s)
    T: float = 20.0
    dt: float = 1e-3
    seed: int = 0
    substeps: Optional[int] = None  # None = pick from the damping stiffness
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.r = self.r / np.linalg.norm(self.r)
        self.R0 = np.asarray(self.R0, dtype=float)
        self.Rd = np.asarray(self.Rd, dtype=float)
        self.Omega0 = np.asarray(self.Omega0, dtype=float)
        if self.T <= 0.0 or self.dt <= 0.0:
            raise DomainInvalid("T and dt must be positive")
        if not is_rotation(self.R0, 1e-6) or not is_rotation(self.Rd, 1e-6):
            raise DomainInvalid("R0 and Rd must be rotation matrices")

    def resolved_substeps(self) -> int:
        if self.substeps is not None:
            return max(1, int(self.substeps))
        # keep the fastest closed-loop pole inside the RK4 stability interval
        pole = self.params.kOmega / self.params.J.lambda_m
        return max(1, int(np.ceil(pole * self.dt / 2.0)))


@dataclass
class TrajectoryLog:
    """Fixed-width per-step record of a closed-loop run."""

    scenario_name: str
    mode: str
    dt: float
    cone_thetas_deg: np.ndarray
    kR: float
    kOmega: float
    notes: list
    t: np.ndarray
    R: np.ndarray            # (N, 9) row-major
    Omega: np.ndarray        # (N, 3)
    e_R: np.ndarray          # (N, 3)
    Psi: np.ndarray
    A: np.ndarray
    B: np.ndarray            # (N, k)
    u: np.ndarray            # (N, 3)
    delta_bar: np.ndarray    # (N, p)
    delta_true: np.ndarray   # (N, p)
    angle_to_cone: np.ndarray  # (N, k), degrees
    V: np.ndarray
    Vdot_estimate: np.ndarray
    complete: bool = True
    violation: Optional[dict] = None

    @property
    def n_cones(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.delta_bar.shape[1]


class _LoopEvaluator:
    """Precomputed closed-loop rate evaluation for the hot integration loop.

    Inlines the error geometry for all cones at once; raises
    ConstraintViolated the moment any cone boundary is reached, including at
    internal integration stages.
    """

    def __init__(self, scen: Scenario):
        p = scen.params
        self.g = p.G.diag
        self.alpha = p.alpha.alpha
        self.r = scen.r
        self.V = np.array([c.v for c in scen.cones])          # (k, 3)
        self.cos_theta = np.array([c.cos_theta for c in scen.cones])
        self.J = p.J.J
        self.J_inv = p.J.J_inv
        self.kR, self.kOm = p.kR, p.kOmega
        self.kD, self.c = p.kDelta, p.c
        self.gravity = p.gravity
        self.adaptive = p.mode == "adaptive"
        self.dist = scen.disturbance
        self.mg_coeff = None
        if self.gravity is not None:
            self.mg_coeff = np.asarray(self.gravity.r_cg, dtype=float)
            self.mg_mg = self.gravity.m * self.gravity.g

    def errors(self, R, Rd, t=None):
        """Return (A, B per cone, psi, e_R) at attitude R."""
        m = Rd.T @ R
        a = 0.5 * float(self.g @ (1.0 - np.diag(m)))
        gm = self.g[:, None] * m
        s_mat = gm - gm.T
        era = 0.5 * np.array([s_mat[2, 1], s_mat[0, 2], s_mat[1, 0]])

        rtv = R.T @ self.V.T                       # (3, k)
        s = self.r @ rtv                           # (k,)
        margin = self.cos_theta - s
        if np.any(margin <= 1e-12):
            i = int(np.argmin(margin))
            raise ConstraintViolated(
                f"cone {i}: r'R'v = {s[i]:.6f} reached cos(theta) = "
                f"{self.cos_theta[i]:.6f}",
                cone_index=i, value=float(s[i]), t=t,
            )
        b = 1.0 - np.log(margin / (1.0 + self.cos_theta)) / self.alpha
        erb = np.cross(rtv.T, self.r) / (self.alpha * (s - self.cos_theta))[:, None]
        scale = 1.0 + float(np.sum(b - 1.0))
        e_r = era * scale + a * erb.sum(axis=0)
        return a, b, scale * a, e_r

    def gravity_moment(self, R):
        e3_body = self.mg_mg * R[2, :]  # R' e3 scaled
        return np.cross(self.mg_coeff, e3_body)

    def control(self, R, omega, e_r, w, delta_bar):
        u = -self.kR * e_r - self.kOm * omega + np.cross(omega, self.J @ omega)
        if self.mg_coeff is not None:
            u = u - self.gravity_moment(R)
        if self.adaptive:
            u = u - w @ delta_bar
        return u

    def rates(self, sigma, omega, delta_bar, R0, Rd, t):
        """Closed-loop state rates in the chart R = R0 exp(sigma^)."""
        R = R0 @ exp_so3(sigma)
        _, _, _, e_r = self.errors(R, Rd, t=t)
        w, d = self.dist.evaluate(R, omega, t)
        u = self.control(R, omega, e_r, w, delta_bar)
        torque = u - np.cross(omega, self.J @ omega) + w @ d
        if self.mg_coeff is not None:
            torque = torque + self.gravity_moment(R)
        omega_dot = self.J_inv @ torque
        c1 = np.cross(sigma, omega)
        sigma_dot = omega - 0.5 * c1 + np.cross(sigma, c1) / 12.0
        if self.adaptive:
            delta_dot = self.kD * (w.T @ (omega + self.c * e_r))
        else:
            delta_dot = np.zeros_like(delta_bar)
        return sigma_dot, omega_dot, delta_dot


def _kernel_args(ev, scen: Scenario):
    """Flat argument tuple for the compiled inner loop, or None if unsupported."""
    from . import _kernels

    if not _kernels.HAVE_NUMBA:
        return None
    dist = scen.disturbance
    if not dist.identity_W or dist.p != 3:
        return None
    kinds = {
        "none": _kernels.DIST_NONE,
        "constant": _kernels.DIST_CONSTANT,
        "time_varying": _kernels.DIST_TIME_VARYING,
    }
    if dist.kind not in kinds:
        return None
    base = np.asarray(dist.Delta(0.0), dtype=float) if dist.kind != "none" else np.zeros(3)
    if dist.kind == "time_varying":
        base = np.array([0.2, 0.2, 0.2])
    p = scen.params
    return (
        ev.g, ev.r, ev.V, ev.cos_theta, float(ev.alpha), ev.J, ev.J_inv,
        p.kR, p.kOmega, p.kDelta, p.c, p.mode == "adaptive",
        kinds[dist.kind], base, 0.02,
    )


def _rk4_substep(ev, R, omega, delta_bar, Rd, t, h):
    z = np.zeros(3)
    s1, w1, d1 = ev.rates(z, omega, delta_bar, R, Rd, t)
    s2, w2, d2 = ev.rates(0.5 * h * s1, omega + 0.5 * h * w1,
                          delta_bar + 0.5 * h * d1, R, Rd, t + 0.5 * h)
    s3, w3, d3 = ev.rates(0.5 * h * s2, omega + 0.5 * h * w2,
                          delta_bar + 0.5 * h * d2, R, Rd, t + 0.5 * h)
    s4, w4, d4 = ev.rates(h * s3, omega + h * w3, delta_bar + h * d3, R, Rd, t + h)
    sigma = h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
    omega = omega + h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
    delta_bar = delta_bar + h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
    return R @ exp_so3(sigma), omega, delta_bar


def run(scenario: Scenario) -> TrajectoryLog:
    """Simulate the closed loop from t = 0 to T, logging every dt.

    Raises InfeasibleGoal if the start, goal or any waypoint violates a cone.
    A violation during the run stops integration and returns the partial log
    with ``complete=False`` and ``violation`` holding the time and cone index.
    """
    p = scenario.params
    try:
        require_feasible(scenario.R0, scenario.r, scenario.cones)
        require_feasible(scenario.Rd, scenario.r, scenario.cones)
        for wp, _ in scenario.waypoints or []:
            require_feasible(wp, scenario.r, scenario.cones)
    except ConstraintViolated as exc:
        raise InfeasibleGoal(f"infeasible start, goal or waypoint: {exc}") from exc

    ev = _LoopEvaluator(scenario)
    from . import _kernels
    kernel_args = _kernel_args(ev, scenario)
    n_steps = int(round(scenario.T / scenario.dt))
    n_rows = n_steps + 1
    k = len(scenario.cones)
    p_dim = scenario.disturbance.p

    targets = [(np.asarray(w, dtype=float), dwell) for w, dwell in scenario.waypoints or []]
    targets.append((scenario.Rd, np.inf))
    target_idx = 0
    target_since = 0.0

    out = {
        "t": np.empty(n_rows), "R": np.empty((n_rows, 9)),
        "Omega": np.empty((n_rows, 3)), "e_R": np.empty((n_rows, 3)),
        "Psi": np.empty(n_rows), "A": np.empty(n_rows),
        "B": np.empty((n_rows, k)), "u": np.empty((n_rows, 3)),
        "delta_bar": np.empty((n_rows, p_dim)),
        "delta_true": np.empty((n_rows, p_dim)),
        "angle_to_cone": np.empty((n_rows, k)),
        "V": np.empty(n_rows),
    }

    R = scenario.R0.copy()
    omega = scenario.Omega0.copy()
    delta_bar = np.zeros(p_dim)
    dt = scenario.dt
    substeps = scenario.resolved_substeps()
    h = dt / substeps
    clamp = 10.0 * scenario.disturbance.B_Delta
    half_J = 0.5 * p.J.J

    complete = True
    violation = None
    rows = n_rows
    for i in range(n_rows):
        t = i * dt
        Rd_cur, dwell = targets[target_idx]
        try:
            a, b, psi_val, e_r = ev.errors(R, Rd_cur, t=t)
        except ConstraintViolated as exc:
            complete = False
            violation = {"t": t, "cone_index": exc.cone_index, "value": exc.value}
            rows = i
            break

        # waypoint hand-off (never leaves the final goal)
        while target_idx < len(targets) - 1 and (
            psi_val < WAYPOINT_PSI_SWITCH or t - target_since >= dwell
        ):
            target_idx += 1
            target_since = t
            Rd_cur, dwell = targets[target_idx]
            a, b, psi_val, e_r = ev.errors(R, Rd_cur, t=t)

        w, d_true = scenario.disturbance.evaluate(R, omega, t)
        u = ev.control(R, omega, e_r, w, delta_bar)

        v_val = float(omega @ (half_J @ omega)) + p.kR * psi_val
        if p.mode == "adaptive":
            e_delta = d_true - delta_bar
            v_val += p.c * float((p.J.J @ omega) @ e_r)
            v_val += 0.5 / p.kDelta * float(e_delta @ e_delta)

        out["t"][i] = t
        out["R"][i] = R.reshape(-1)
        out["Omega"][i] = omega
        out["e_R"][i] = e_r
        out["Psi"][i] = psi_val
        out["A"][i] = a
        out["B"][i] = b
        out["u"][i] = u
        out["delta_bar"][i] = delta_bar
        out["delta_true"][i] = d_true
        s = scenario.r @ (R.T @ ev.V.T)
        out["angle_to_cone"][i] = np.degrees(np.arccos(np.clip(s, -1.0, 1.0)))
        out["V"][i] = v_val

        if i == n_steps:
            break
        if kernel_args is not None:
            R, omega, delta_bar, viol = _kernels.advance(
                R, omega, delta_bar, Rd_cur, t, h, substeps, *kernel_args
            )
            if viol >= 0:
                complete = False
                violation = {"t": t, "cone_index": int(viol), "value": None}
                rows = i + 1
                break
        else:
            try:
                for j in range(substeps):
                    R, omega, delta_bar = _rk4_substep(
                        ev, R, omega, delta_bar, Rd_cur, t + j * h, h
                    )
            except ConstraintViolated as exc:
                complete = False
                violation = {
                    "t": exc.t, "cone_index": exc.cone_index, "value": exc.value,
                }
                rows = i + 1
                break
        norm_db = float(np.linalg.norm(delta_bar))
        if norm_db > clamp:
            log.warning("estimator clamp hit at t=%.3f (|delta_bar|=%.3g)", t, norm_db)
            delta_bar = delta_bar * (clamp / norm_db)

    data = {key: arr[:rows] for key, arr in out.items()}
    vdot = np.zeros(rows)
    if rows >= 3:
        vdot[1:-1] = (data["V"][2:] - data["V"][:-2]) / (2.0 * dt)
        vdot[0] = (data["V"][1] - data["V"][0]) / dt
        vdot[-1] = (data["V"][-1] - data["V"][-2]) / dt

    return TrajectoryLog(
        scenario_name=scenario.name,
        mode=p.mode,
        dt=dt,
        cone_thetas_deg=np.degrees([c.theta for c in scenario.cones]),
        kR=p.kR,
        kOmega=p.kOmega,
        notes=list(scenario.notes),
        Vdot_estimate=vdot,
        complete=complete,
        violation=violation,
        **data,
    )


def monitors(tl: TrajectoryLog) -> dict:
    """Post-run health report: Lyapunov behavior, error-rate identity, margins."""
    dv = np.diff(tl.V)
    dt = tl.dt
    tol = 1e-6 + 10.0 * dt * dt
    if tl.mode == "smooth":
        # trapezoidal bound from the continuous decay identity over each step,
        # with the trapezoid-rule error term restored from the curvature of
        # |e_Omega|^2 (second difference ~ second derivative * dt^2)
        e_omega_sq = np.sum(tl.Omega**2, axis=1)
        trap = 0.5 * (e_omega_sq[:-1] + e_omega_sq[1:])
        curv = np.zeros_like(trap)
        if len(e_omega_sq) >= 3:
            inner = np.abs(np.diff(e_omega_sq, 2))
            curv[:-1] = inner
            curv[1:] = np.maximum(curv[1:], inner)
        bound = (-tl.kOmega * trap + tol) * dt + tl.kOmega * dt / 6.0 * curv
    else:
        # adaptive V is only guaranteed non-increasing
        bound = tol * dt
    lyap_excess = dv - bound

    psi_rate_residual = 0.0
    if len(tl.t) >= 3:
        dpsi = (tl.Psi[2:] - tl.Psi[:-2]) / (2.0 * dt)
        predicted = np.sum(tl.e_R * tl.Omega, axis=1)[1:-1]
        psi_rate_residual = float(np.max(np.abs(dpsi - predicted))) if len(dpsi) else 0.0

    margins = tl.angle_to_cone - tl.cone_thetas_deg[None, :]
    term_delta_err = float(
        np.max(np.abs(tl.delta_bar[-1] - tl.delta_true[-1]))
    ) if len(tl.t) else float("nan")

    return {
        "max_lyapunov_step_increase": float(np.max(dv)) if len(dv) else 0.0,
        "lyapunov_violations": int(np.sum(lyap_excess > 0.0)) if len(dv) else 0,
        "max_lyapunov_excess": float(np.max(lyap_excess)) if len(dv) else 0.0,
        "max_psi_rate_residual": psi_rate_residual,
        "min_margin_deg": [float(m) for m in margins.min(axis=0)],
        "terminal_psi": float(tl.Psi[-1]),
        "terminal_delta_error": term_delta_err,
        "complete": tl.complete,
    }


# ---------------------------------------------------------------------------
# benchmark scenarios
# ---------------------------------------------------------------------------

_BENCH_J = np.array([
    [5.5, 0.06, -0.03],
    [0.06, 5.5, 0.01],
    [-0.03, 0.01, 0.1],
]) * 1e-3

_BENCH_CONES = [
    ([0.174, -0.934, -0.034], 40.0),
    ([0.0, 0.7071, 0.7071], 40.0),
    ([-0.853, 0.436, -0.286], 40.0),
    ([-0.122, -0.140, -0.983], 20.0),
]

E3 = np.array([0.0, 0.0, 1.0])
E2 = np.array([0.0, 1.0, 0.0])


def _bench_cones():
    cones = []
    notes = []
    for v, theta_deg in _BENCH_CONES:
        raw = np.asarray(v, dtype=float)
        cone = ConstraintCone(v=raw, theta=np.radians(theta_deg))
        correction = float(np.linalg.norm(raw - cone.v))
        if correction > 0.0:
            notes.append(
                f"cone axis {v} renormalized (|correction| = {correction:.2e})"
            )
        cones.append(cone)
    return cones, notes


def make_benchmark_scenarios() -> dict:
    """The four benchmark scenarios used by the acceptance suite and CLI configs."""
    inertia = InertiaMatrix(_BENCH_J)
    weights = AttractiveWeights(0.9, 1.1, 1.0)
    shape = BarrierShape(15.0)
    constant, varying = make_benchmark_disturbances()
    cones, notes = _bench_cones()
    r = np.array([1.0, 0.0, 0.0])

    def multi(mode, dist):
        return Scenario(
            name=f"multi_constraint_{mode}",
            params=ControllerParams(
                kR=0.4, kOmega=0.296, kDelta=0.5, c=1.0,
                G=weights, alpha=shape, J=inertia, mode=mode,
            ),
            r=r, cones=cones,
            R0=exp_so3(np.radians(225.0) * E3),
            Rd=np.eye(3), Omega0=np.zeros(3),
            disturbance=dist,
            T=20.0, dt=1e-3,
            notes=list(notes),
        )

    single_cone = [ConstraintCone(v=np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0),
                                  theta=np.radians(12.0))]

    time_varying = Scenario(
        name="time_varying",
        params=ControllerParams(
            kR=0.4, kOmega=0.296, kDelta=0.5, c=1.0,
            G=weights, alpha=shape, J=inertia, mode="adaptive",
        ),
        r=r, cones=single_cone,
        R0=exp_so3(np.pi / 2.0 * E3),
        Rd=np.eye(3), Omega0=np.zeros(3),
        disturbance=varying,
        T=20.0, dt=1e-3,
    )

    # hexrotor-on-a-joint style run; the intermediary set points are not
    # published, the two used here flank the cone at 25 deg elevation
    wp = [
        (exp_so3(np.radians(67.5) * E3) @ exp_so3(np.radians(25.0) * E2), 3.0),
        (exp_so3(np.radians(22.5) * E3) @ exp_so3(np.radians(25.0) * E2), 3.0),
    ]
    experiment_like = Scenario(
        name="experiment_like",
        params=ControllerParams(
            kR=0.4, kOmega=0.7, kDelta=0.05, c=0.1,
            G=weights, alpha=BarrierShape(8.0), J=inertia, mode="adaptive",
            gravity=GravityMoment(r_cg=np.array([0.0, 0.0, 0.05]), m=1.0),
        ),
        r=r, cones=single_cone,
        R0=exp_so3(np.pi / 2.0 * E3),
        Rd=np.eye(3), Omega0=np.zeros(3),
        disturbance=constant,
        waypoints=wp,
        T=20.0, dt=1e-3,
        notes=["waypoints are non-published values flanking the cone"],
    )

    constant2, _ = make_benchmark_disturbances()
    return {
        "multi_constraint_smooth": multi("smooth", constant2),
        "multi_constraint_adaptive": multi("adaptive", constant),
        "time_varying": time_varying,
        "experiment_like": experiment_like,
    }


# ---------------------------------------------------------------------------
# Euler 3-1-3 demonstration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EulerSample:
    t: float
    theta1: float
    theta2: float
    theta3: float
    rate1: float
    rate2: float
    rate3: float
    singular: bool


def euler313_rotation(theta1, theta2, theta3) -> np.ndarray:
    """Rotation matrix of the 3-1-3 sequence."""
    s1, c1 = np.sin(theta1), np.cos(theta1)
    s2, c2 = np.sin(theta2), np.cos(theta2)
    s3, c3 = np.sin(theta3), np.cos(theta3)
    return np.array([
        [-s1 * c2 * s3 + c3 * c1, -s1 * c2 * c3 - s3 * c1, s1 * s2],
        [c1 * c2 * s3 + c3 * s1, c1 * c2 * c3 - s3 * s1, -c1 * s2],
        [s2 * s3, s2 * c3, c2],
    ])


def euler313_angles(R) -> tuple[float, float, float, bool]:
    """Extract (theta1, theta2, theta3, singular) from a rotation matrix."""
    R = np.asarray(R, dtype=float)
    theta2 = float(np.arccos(np.clip(R[2, 2], -1.0, 1.0)))
    singular = abs(np.sin(theta2)) < SINGULARITY_SIN_TOL
    if abs(np.sin(theta2)) < 1e-12:
        # axes 1 and 3 align; split the total angle arbitrarily
        theta1 = float(np.arctan2(-R[0, 1], R[0, 0]))
        theta3 = 0.0
    else:
        theta1 = float(np.arctan2(R[0, 2], -R[1, 2]))
        theta3 = float(np.arctan2(R[2, 0], R[2, 1]))
    return theta1, theta2, theta3, singular


def euler313_rates(theta2, theta3, omega) -> tuple[float, float, float]:
    """Euler-angle kinematics; divergent as sin(theta2) -> 0."""
    o1, o2, o3 = omega
    s2 = np.sin(theta2)
    s3, c3 = np.sin(theta3), np.cos(theta3)
    if s2 == 0.0:
        s2 = np.finfo(float).tiny
    rate1 = (o1 * s3 + o2 * c3) / s2
    rate2 = o1 * c3 - o2 * s3
    rate3 = -(o1 * s3 + o2 * c3) * np.cos(theta2) / s2 + o3
    return float(rate1), float(rate2), float(rate3)


def euler313_demo(
    trajectory: Optional[TrajectoryLog] = None,
    theta2_window_deg: tuple[float, float] = (0.0, 180.0),
    samples: int = 721,
    omega=(1.0, 1.0, 0.0),
) -> list[EulerSample]:
    """Tabulate 3-1-3 angles and rates, flagging near-singular samples.

    With a trajectory log, angles are extracted from the logged attitudes;
    otherwise a synthetic sweep of theta2 over the window is used with the
    given constant angular velocity.
    """
    rows = []
    if trajectory is not None:
        for i in range(len(trajectory.t)):
            R = trajectory.R[i].reshape(3, 3)
            th1, th2, th3, singular = euler313_angles(R)
            r1, r2, r3 = euler313_rates(th2, th3, trajectory.Omega[i])
            rows.append(EulerSample(float(trajectory.t[i]), th1, th2, th3,
                                    r1, r2, r3, singular))
        return rows

    omega = np.asarray(omega, dtype=float)
    lo, hi = np.radians(theta2_window_deg)
    theta1, theta3 = 0.3, 0.4
    for i, th2 in enumerate(np.linspace(lo, hi, samples)):
        R = euler313_rotation(theta1, th2, theta3)
        e_th1, e_th2, e_th3, singular = euler313_angles(R)
        r1, r2, r3 = euler313_rates(e_th2, e_th3, omega)
        rows.append(EulerSample(float(i), e_th1, e_th2, e_th3, r1, r2, r3, singular))
    return rows


# ---------------------------------------------------------------------------
# CSV serialization and scenario files
# ---------------------------------------------------------------------------

def _csv_columns(tl: TrajectoryLog) -> list[str]:
    k, p = tl.n_cones, tl.p
    cols = ["t"]
    cols += [f"R_{i}" for i in range(1, 10)]
    cols += [f"Omega_{i}" for i in range(1, 4)]
    cols += [f"e_R_{i}" for i in range(1, 4)]
    cols += ["Psi", "A"]
    cols += [f"B_{i}" for i in range(1, k + 1)]
    cols += [f"u_{i}" for i in range(1, 4)]
    cols += [f"delta_bar_{i}" for i in range(1, p + 1)]
    cols += [f"delta_true_{i}" for i in range(1, p + 1)]
    cols += [f"angle_to_cone_{i}" for i in range(1, k + 1)]
    cols += ["V", "Vdot_estimate"]
    return cols


def write_csv(tl: TrajectoryLog, path) -> None:
    """Serialize the log: metadata comment lines, header row, 17-digit floats."""
    table = np.column_stack([
        tl.t, tl.R, tl.Omega, tl.e_R, tl.Psi, tl.A, tl.B, tl.u,
        tl.delta_bar, tl.delta_true, tl.angle_to_cone, tl.V, tl.Vdot_estimate,
    ])
    thetas = ",".join(f"{x:g}" for x in tl.cone_thetas_deg)
    lines = [
        f"# geoatt-trajectory schema=1 scenario={tl.scenario_name} "
        f"mode={tl.mode} dt={tl.dt:g} complete={tl.complete}",
        f"# cone_theta_deg={thetas}",
    ]
    lines += [f"# note: {note}" for note in tl.notes]
    lines.append(",".join(_csv_columns(tl)))
    lines += [",".join(f"{x:.17g}" for x in row) for row in table]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _parse_rotation(obj, what="rotation"):
    if isinstance(obj, dict) and "axis" in obj:
        axis = np.asarray(obj["axis"], dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            raise DomainInvalid(f"{what}: axis must be nonzero")
        return exp_so3(np.radians(float(obj["angle_deg"])) * axis / norm)
    if isinstance(obj, dict) and "matrix" in obj:
        m = np.asarray(obj["matrix"], dtype=float).reshape(3, 3)
        if not is_rotation(m, 1e-6):
            raise DomainInvalid(f"{what}: matrix is not a rotation")
        return m
    raise DomainInvalid(f"{what}: expected axis-angle or 9-element matrix")


def scenario_from_dict(cfg: dict) -> Scenario:
    """Build a scenario from the JSON document schema (angles in degrees)."""
    try:
        gains = cfg["gains"]
        g = cfg["G"]
        weights = AttractiveWeights(float(g[0]), float(g[1]), float(g[2]))
        cones = [
            ConstraintCone(v=np.asarray(c["v"], dtype=float),
                           theta=np.radians(float(c["theta_deg"])))
            for c in cfg["cones"]
        ]
        gravity = None
        if cfg.get("gravity"):
            gcfg = cfg["gravity"]
            gravity = GravityMoment(
                r_cg=np.asarray(gcfg["r_cg"], dtype=float),
                m=float(gcfg["m"]),
                g=float(gcfg.get("g", 9.81)),
            )
        params = ControllerParams(
            kR=float(gains["kR"]), kOmega=float(gains["kOmega"]),
            kDelta=float(gains["kDelta"]), c=float(gains["c"]),
            G=weights, alpha=BarrierShape(float(cfg["alpha"])),
            J=InertiaMatrix(np.asarray(cfg["J"], dtype=float)),
            mode=cfg.get("mode", "adaptive"),
            gravity=gravity,
        )
        kind = cfg.get("disturbance", {}).get("kind", "none")
        constant, varying = make_benchmark_disturbances()
        if kind == "constant":
            dist = constant
        elif kind == "time_varying":
            dist = varying
        elif kind == "none":
            dist = DisturbanceModel(kind="none")
        else:
            raise DomainInvalid(f"unknown disturbance kind {kind!r}")
        waypoints = None
        if cfg.get("waypoints"):
            waypoints = [
                (_parse_rotation(w["R"], "waypoint"), float(w.get("dwell_s", np.inf)))
                for w in cfg["waypoints"]
            ]
        return Scenario(
            name=cfg.get("name", "scenario"),
            params=params,
            r=np.asarray(cfg["r"], dtype=float),
            cones=cones,
            R0=_parse_rotation(cfg["R0"], "R0"),
            Rd=_parse_rotation(cfg["Rd"], "Rd"),
            Omega0=np.asarray(cfg.get("Omega0", [0.0, 0.0, 0.0]), dtype=float),
            disturbance=dist,
            waypoints=waypoints,
            T=float(cfg.get("T", 20.0)),
            dt=float(cfg.get("dt", 1e-3)),
            seed=int(cfg.get("seed", 0)),
            substeps=cfg.get("substeps"),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise DomainInvalid(f"invalid scenario config: {exc}") from exc


def load_scenario(path) -> Scenario:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainInvalid(f"cannot read scenario file {path}: {exc}") from exc
    return scenario_from_dict(cfg)
