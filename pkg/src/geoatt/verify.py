"""Self-contained property suites: identities, gradients, bounds, integrator order.

Each check returns (name, passed, detail); :func:`run_all` aggregates them.
The ``fault`` hook deliberately corrupts one quantity so the suite's own
sensitivity can be demonstrated.
"""
from __future__ import annotations

import numpy as np

from .dynamics import BodyState, InertiaMatrix, step
from .exceptions import DomainInvalid
from .geometry import (
    AttractiveWeights,
    BarrierShape,
    ConstraintCone,
    bound_ledger,
    attractive_A,
    err_vec_eR,
    err_vec_eRA,
    err_vec_eRB,
    matrix_E,
    matrix_F,
    psi,
)
from .so3 import check_identities, exp_so3, rotation_error

__all__ = ["run_all", "random_rotation", "gradient_checks", "bound_checks",
           "identity_checks", "integrator_order_check", "measure_order"]


def random_rotation(rng) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return exp_so3(rng.uniform(0.0, np.pi) * axis)


def _benchmark_geometry():
    weights = AttractiveWeights(0.9, 1.1, 1.0)
    shape = BarrierShape(15.0)
    cone = ConstraintCone(v=np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0),
                          theta=np.radians(40.0))
    r = np.array([1.0, 0.0, 0.0])
    return weights, shape, cone, r


def _feasible_samples(rng, r, cone, count, beta_cap=None):
    out = []
    while len(out) < count:
        R = random_rotation(rng)
        s = r @ (R.T @ cone.v)
        if s >= cone.cos_theta - 1e-6:
            continue
        if beta_cap is not None and s > beta_cap:
            continue
        out.append(R)
    return out


def identity_checks(seed: int, samples: int):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x, y, z = rng.normal(size=(3, 3))
        a = rng.normal(size=(3, 3))
        R = random_rotation(rng)
        report = check_identities(x, y, z, a, R, tol=1e-12)
        worst = max(worst, max(v for k, v in report.items() if k != "passed"))
        if not report["passed"]:
            return ("hat_map_identities", False, f"residual {worst:.3e}")
    return ("hat_map_identities", True, f"max residual {worst:.3e}")


def gradient_checks(seed: int, cases: int = 100, eps: float = 1e-6,
                    rel_tol: float = 1e-4, fault: str | None = None):
    """Finite-difference consistency of e_R, E and F against Psi, e_RA, e_RB."""
    weights, shape, cone, r = _benchmark_geometry()
    rng = np.random.default_rng(seed)
    Rd = np.eye(3)
    cones = [cone]
    worst = 0.0
    for R in _feasible_samples(rng, r, cone, cases):
        eta = rng.normal(size=3)
        eta /= np.linalg.norm(eta)
        # keep the probe clear of the goal so relative error is meaningful
        if psi(R, Rd, r, cones, weights, shape) < 1e-3:
            continue

        grad = err_vec_eR(R, Rd, r, cones, weights, shape)
        fd = (psi(R @ exp_so3(eps * eta), Rd, r, cones, weights, shape)
              - psi(R @ exp_so3(-eps * eta), Rd, r, cones, weights, shape)) / (2 * eps)
        rel = abs(fd - eta @ grad) / max(abs(fd), 1e-9)
        worst = max(worst, rel)

        omega = rng.normal(size=3)
        e_mat = matrix_E(R, Rd, weights)
        fd_a = (err_vec_eRA(R @ exp_so3(eps * omega), Rd, weights)
                - err_vec_eRA(R @ exp_so3(-eps * omega), Rd, weights)) / (2 * eps)
        rel = np.linalg.norm(fd_a - e_mat @ omega) / max(np.linalg.norm(fd_a), 1e-9)
        worst = max(worst, rel)

        sign = -1.0 if fault == "flip_eRB_sign" else 1.0
        f_mat = sign * matrix_F(R, r, cone, shape)
        fd_b = (err_vec_eRB(R @ exp_so3(eps * omega), r, cone, shape)
                - err_vec_eRB(R @ exp_so3(-eps * omega), r, cone, shape)) / (2 * eps)
        rel = np.linalg.norm(fd_b - f_mat @ omega) / max(np.linalg.norm(fd_b), 1e-9)
        worst = max(worst, rel)

    passed = worst < rel_tol
    return ("gradient_oracles", passed, f"worst relative error {worst:.3e}")


def tight_b1(weights: AttractiveWeights) -> float:
    """Largest constant with b1 |e_RA|^2 <= A everywhere: h1 over the max-based
    sums (the min-based variant in the ledger fails near the identity)."""
    g1, g2, g3 = weights.g1, weights.g2, weights.g3
    sums = (g1 + g2, g2 + g3, g3 + g1)
    diffs = ((g1 - g2) ** 2, (g2 - g3) ** 2, (g3 - g1) ** 2)
    return min(sums) / (max(diffs) + max(s * s for s in sums))


def tight_eRB_bound(cone: ConstraintCone, shape: BarrierShape, beta: float) -> float:
    """Supremum of |e_RB| over r' R' v <= beta: the numerator is the sine at
    the domain edge acos(beta), not sin(theta)."""
    return np.sqrt(1.0 - beta * beta) / (shape.alpha * (cone.cos_theta - beta))


def bound_checks(seed: int, samples: int):
    """Sampled verification of the e_RA, E and e_RB bounds (tight constants)."""
    weights, shape, cone, r = _benchmark_geometry()
    rng = np.random.default_rng(seed)
    Rd = np.eye(3)
    psi_cap, beta_cap = 0.9 * 1.9, 0.5
    ledger = bound_ledger(weights, cone, shape, psi_cap, beta_cap)
    b1 = tight_b1(weights)
    erb_cap = tight_eRB_bound(cone, shape, beta_cap)
    violations = 0
    for _ in range(samples):
        R = random_rotation(rng)
        a = attractive_A(R, Rd, weights)
        era = err_vec_eRA(R, Rd, weights)
        if era @ era > a / b1 + 1e-12:
            violations += 1
        if np.linalg.norm(matrix_E(R, Rd, weights), 2) > ledger.normE_bound + 1e-12:
            violations += 1
        s = r @ (R.T @ cone.v)
        if s <= beta_cap:
            erb = err_vec_eRB(R, r, cone, shape)
            if np.linalg.norm(erb) > erb_cap + 1e-12:
                violations += 1
    return ("analytic_bounds", violations == 0, f"{violations} violations")


def measure_order(method: str = "rk4_project", dts=(2e-2, 1e-2, 5e-3, 2.5e-3)) -> float:
    """Convergence order against the closed-form principal-axis spin."""
    J = InertiaMatrix(np.diag([2.0, 1.0, 1.0]))
    omega0 = np.array([0.0, 0.0, 1.3])
    T = 2.0
    errors = []
    for dt in dts:
        state = BodyState(R=np.eye(3), Omega=omega0.copy())
        n = int(round(T / dt))
        for i in range(n):
            state = step(state, np.zeros(3), J, None, i * dt, dt, method=method)
        exact = exp_so3(T * omega0)
        errors.append(np.linalg.norm(state.R - exact))
    orders = [np.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    return float(np.mean(orders))


def integrator_order_check():
    order = measure_order("rk4_project")
    ok = abs(order - 4.0) <= 0.3
    # the multiplicative integrator is exact on this closed form; just check drift
    J = InertiaMatrix(np.diag([2.0, 1.0, 1.0]))
    state = BodyState(R=np.eye(3), Omega=np.array([0.4, -0.2, 1.0]))
    for i in range(2000):
        state = step(state, np.zeros(3), J, None, i * 1e-3, 1e-3, method="lie_rk4")
    drift = rotation_error(state.R)
    ok = ok and drift < 1e-10
    return ("integrator_order", ok, f"order {order:.3f}, drift {drift:.2e}")


def run_all(seed: int = 0, samples: int = 10_000, fault: str | None = None):
    """Run every suite; returns a list of (name, passed, detail)."""
    if samples <= 0:
        raise DomainInvalid("samples must be positive")
    return [
        identity_checks(seed, min(samples, 10_000)),
        gradient_checks(seed + 1, fault=fault),
        bound_checks(seed + 2, samples),
        integrator_order_check(),
    ]
