"""Configuration error function with logarithmic barrier, and its calculus.

The attitude error is the product of an attractive trace term toward the goal
attitude and a barrier term that diverges as the body-fixed sensor direction
approaches a keep-out cone.  This module provides the scalar error, its
gradient vectors, the Jacobian-like matrices of the error dynamics, and the
analytic bound ledger used by the adaptive-gain validator.

Rotations are plain 3x3 numpy arrays (a :class:`~geoatt.so3.Rotation` is
unwrapped transparently).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConstraintViolated, DomainInvalid
from .so3 import Rotation, exp_so3, hat, vee

__all__ = [
    "AttractiveWeights",
    "ConstraintCone",
    "BarrierShape",
    "BoundLedger",
    "attractive_A",
    "barrier_B",
    "psi",
    "err_vec_eRA",
    "err_vec_eRB",
    "err_vec_eR",
    "matrix_E",
    "matrix_F",
    "bound_ledger",
    "hessian_psi_at_goal",
    "estimate_quadratic_bounds",
    "cone_cosine",
    "require_feasible",
]

# treat r'R'v >= cos(theta) - FEASIBILITY_MARGIN as violated so the log
# argument stays strictly positive
FEASIBILITY_MARGIN = 1e-12


def _mat(r):
    return r.m if isinstance(r, Rotation) else np.asarray(r, dtype=float)


@dataclass(frozen=True)
class AttractiveWeights:
    """Diagonal weights of the attractive error term; must be distinct."""

    g1: float
    g2: float
    g3: float

    def __post_init__(self):
        g = (self.g1, self.g2, self.g3)
        if any(gi <= 0.0 for gi in g):
            raise DomainInvalid(f"weights must be positive, got {g}")
        pairs = [(self.g1, self.g2), (self.g2, self.g3), (self.g3, self.g1)]
        if any(abs(a - b) <= 1e-9 for a, b in pairs):
            raise DomainInvalid(f"weights must be pairwise distinct, got {g}")

    @property
    def diag(self) -> np.ndarray:
        return np.array([self.g1, self.g2, self.g3])

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)

    @property
    def trace(self) -> float:
        return self.g1 + self.g2 + self.g3


@dataclass(frozen=True)
class ConstraintCone:
    """Keep-out cone: inertial direction ``v`` with half-angle ``theta`` (rad)."""

    v: np.ndarray
    theta: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise DomainInvalid("cone axis must be a nonzero vector")
        object.__setattr__(self, "v", v / norm)
        if not 0.0 < self.theta <= np.pi / 2:
            raise DomainInvalid(
                f"cone half-angle must be in (0, pi/2], got {self.theta}"
            )

    @property
    def cos_theta(self) -> float:
        return float(np.cos(self.theta))


@dataclass(frozen=True)
class BarrierShape:
    """Positive shape constant of the logarithmic barrier."""

    alpha: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise DomainInvalid(f"barrier shape must be positive, got {self.alpha}")


@dataclass(frozen=True)
class BoundLedger:
    """Analytic bounds feeding the adaptive-gain condition.

    ``h4``/``h5`` duplicate ``h1``/``h3`` by construction; both are exposed
    because the source analysis names them separately.
    """

    h1: float
    h2: float
    h3: float
    h4: float
    h5: float
    b1: float
    b2: float
    psi_cap: float
    beta_cap: float
    cA: float
    cB: float
    normE_bound: float
    normF_bound: float
    eRA_bound: float
    eRB_bound: float
    H: float


def cone_cosine(R, r, cone: ConstraintCone) -> float:
    """cos of the angle between the rotated sensor and the cone axis: r'R'v."""
    R = _mat(R)
    r = np.asarray(r, dtype=float)
    return float(r @ (R.T @ cone.v))


def require_feasible(R, r, cones, t=None) -> list[float]:
    """Check strict feasibility against every cone; returns the cosines.

    Raises :class:`ConstraintViolated` carrying the first offending cone index.
    """
    cosines = []
    for i, cone in enumerate(cones):
        s = cone_cosine(R, r, cone)
        if s >= cone.cos_theta - FEASIBILITY_MARGIN:
            raise ConstraintViolated(
                f"cone {i}: r'R'v = {s:.6f} >= cos(theta) = {cone.cos_theta:.6f}",
                cone_index=i,
                value=s,
                t=t,
            )
        cosines.append(s)
    return cosines


def attractive_A(R, Rd, G: AttractiveWeights) -> float:
    """Attractive error 0.5 tr[G (I - Rd'R)]; zero iff R == Rd."""
    R, Rd = _mat(R), _mat(Rd)
    return float(0.5 * np.trace(G.matrix @ (np.eye(3) - Rd.T @ R)))


def barrier_B(R, r, cone: ConstraintCone, shape: BarrierShape) -> float:
    """Logarithmic barrier; > 1 inside the feasible set, diverging at the cone."""
    s = require_feasible(R, r, [cone])[0]
    return 1.0 - np.log((cone.cos_theta - s) / (1.0 + cone.cos_theta)) / shape.alpha


def _barrier_values(R, r, cones, shape):
    require_feasible(R, r, cones)
    return [barrier_B(R, r, cone, shape) for cone in cones]


def psi(R, Rd, r, cones, G: AttractiveWeights, shape: BarrierShape) -> float:
    """Combined configuration error A * (1 + sum_i (B_i - 1)).

    Reduces to A * B for a single cone.
    """
    bs = _barrier_values(R, r, cones, shape)
    a = attractive_A(R, Rd, G)
    return a * (1.0 + sum(b - 1.0 for b in bs))


def err_vec_eRA(R, Rd, G: AttractiveWeights) -> np.ndarray:
    """Gradient vector of the attractive term: 0.5 (G Rd'R - R'Rd G)^vee."""
    R, Rd = _mat(R), _mat(Rd)
    gm = G.matrix
    m = gm @ Rd.T @ R
    return 0.5 * vee(m - m.T, tol=np.inf)


def err_vec_eRB(R, r, cone: ConstraintCone, shape: BarrierShape) -> np.ndarray:
    """Gradient vector of the barrier term: (R'v)^ r / (alpha (r'R'v - cos t))."""
    s = require_feasible(R, r, [cone])[0]
    R = _mat(R)
    r = np.asarray(r, dtype=float)
    rtv = R.T @ cone.v
    return np.cross(rtv, r) / (shape.alpha * (s - cone.cos_theta))


def err_vec_eR(R, Rd, r, cones, G: AttractiveWeights, shape: BarrierShape) -> np.ndarray:
    """Gradient of :func:`psi`: e_RA (1 + sum (B_i - 1)) + A sum e_RB_i."""
    bs = _barrier_values(R, r, cones, shape)
    a = attractive_A(R, Rd, G)
    era = err_vec_eRA(R, Rd, G)
    erb_sum = np.zeros(3)
    for cone in cones:
        erb_sum += err_vec_eRB(R, r, cone, shape)
    return era * (1.0 + sum(b - 1.0 for b in bs)) + a * erb_sum


def matrix_E(R, Rd, G: AttractiveWeights) -> np.ndarray:
    """Matrix relating d/dt e_RA = E Omega: 0.5 (tr[R'Rd G] I - R'Rd G)."""
    R, Rd = _mat(R), _mat(Rd)
    m = R.T @ Rd @ G.matrix
    return 0.5 * (np.trace(m) * np.eye(3) - m)


def matrix_F(R, r, cone: ConstraintCone, shape: BarrierShape) -> np.ndarray:
    """Matrix relating d/dt e_RB = F Omega."""
    s = require_feasible(R, r, [cone])[0]
    R = _mat(R)
    r = np.asarray(r, dtype=float)
    v = cone.v
    denom = s - cone.cos_theta
    rtv = R.T @ v
    col = np.cross(rtv, r)  # R' hat(v) R r = (R'v) x r
    row = (v @ R) @ hat(r)
    return (
        (s * np.eye(3)) - np.outer(rtv, r) + np.outer(col, row) / denom
    ) / (shape.alpha * denom)


def bound_ledger(
    G: AttractiveWeights,
    cone: ConstraintCone,
    shape: BarrierShape,
    psi_cap: float,
    beta_cap: float,
    J=None,
) -> BoundLedger:
    """Assemble the analytic bounds valid on the domain {Psi < psi_cap, r'R'v < beta_cap}.

    ``J`` is accepted for interface symmetry with the gain validator but does
    not enter any bound here.
    """
    g = G.diag
    sums = [g[0] + g[1], g[1] + g[2], g[2] + g[0]]
    diffs = [(g[0] - g[1]) ** 2, (g[1] - g[2]) ** 2, (g[2] - g[0]) ** 2]
    h1 = min(sums)
    h2 = min(diffs)
    h3 = min(si**2 for si in sums)
    h4 = h1
    h5 = h3
    if not 0.0 < psi_cap < h1:
        raise DomainInvalid(f"psi_cap must lie in (0, {h1}), got {psi_cap}")
    cos_t = cone.cos_theta
    if not 0.0 < beta_cap < cos_t:
        raise DomainInvalid(f"beta_cap must lie in (0, {cos_t}), got {beta_cap}")

    b1 = h1 / (h2 + h3)
    b2 = h1 * h4 / (h5 * (h1 - psi_cap))
    alpha = shape.alpha
    beta = beta_cap

    c_a = psi_cap  # A <= Psi / B < psi_cap since B > 1
    c_b = 1.0 - np.log((cos_t - beta) / (1.0 + cos_t)) / alpha  # B at r'R'v = beta

    norm_e = G.trace / np.sqrt(2.0)
    norm_f = (
        (beta**2 + 1.0) * (beta - cos_t) ** 2 + 1.0 + beta**2 * (beta**2 - 2.0)
    ) / (alpha**2 * (beta - cos_t) ** 4)
    era_bound = np.sqrt(psi_cap / b1)
    erb_bound = np.sin(cone.theta) / (alpha * (cos_t - beta))
    big_h = c_b * norm_e + 2.0 * era_bound * erb_bound + c_a * norm_f

    return BoundLedger(
        h1=h1, h2=h2, h3=h3, h4=h4, h5=h5,
        b1=b1, b2=b2,
        psi_cap=psi_cap, beta_cap=beta_cap,
        cA=c_a, cB=float(c_b),
        normE_bound=float(norm_e), normF_bound=float(norm_f),
        eRA_bound=float(era_bound), eRB_bound=float(erb_bound),
        H=float(big_h),
    )


def default_domain_caps(G: AttractiveWeights, cones) -> tuple[float, float]:
    """Default (psi_cap, beta_cap) when a scenario does not specify them."""
    g = G.diag
    h1 = min(g[0] + g[1], g[1] + g[2], g[2] + g[0])
    min_cos = min(cone.cos_theta for cone in cones)
    return 0.9 * h1, 0.9 * min_cos


def hessian_psi_at_goal(Rd, r, cones, G: AttractiveWeights, shape: BarrierShape) -> np.ndarray:
    """Hessian quadratic form of psi at R = Rd.

    The attractive term and its gradient vanish at the goal, leaving
    0.5 * (1 + sum (B_i - 1)) * (tr[G] I - G), which is positive definite.
    """
    bs = _barrier_values(Rd, r, cones, shape)
    scale = 1.0 + sum(b - 1.0 for b in bs)
    return 0.5 * scale * (G.trace * np.eye(3) - G.matrix)


def estimate_quadratic_bounds(
    Rd,
    r,
    cones,
    G: AttractiveWeights,
    shape: BarrierShape,
    psi_cap: float,
    beta_cap: float,
    samples: int,
    seed: int = 0,
    max_angle: float = np.pi,
) -> tuple[float, float]:
    """Sampled quadratic sandwich constants (n1, n2) with n1 <= Psi/|e_R|^2 <= n2.

    The source analysis only asserts existence of these constants; here they
    are estimated by rejection sampling over the domain
    {Psi < psi_cap, r'R'v_i < beta_cap}.  Samples with |e_R| < 1e-9 are
    excluded.  Raises :class:`DomainInvalid` when no feasible sample is found.
    """
    if samples <= 0:
        raise DomainInvalid("samples must be positive")
    rng = np.random.default_rng(seed)
    Rd = _mat(Rd)
    n1 = np.inf
    n2 = 0.0
    accepted = 0
    for _ in range(samples):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(0.0, max_angle)
        R = Rd @ exp_so3(angle * axis)
        try:
            cosines = require_feasible(R, r, cones)
        except ConstraintViolated:
            continue
        if any(s >= beta_cap for s in cosines):
            continue
        value = psi(R, Rd, r, cones, G, shape)
        if value >= psi_cap:
            continue
        grad = err_vec_eR(R, Rd, r, cones, G, shape)
        norm2 = float(grad @ grad)
        if norm2 < 1e-18:
            continue
        ratio = value / norm2
        n1 = min(n1, ratio)
        n2 = max(n2, ratio)
        accepted += 1
    if accepted == 0:
        raise DomainInvalid("no feasible samples found in the quadratic domain")
    return float(n1), float(n2)
