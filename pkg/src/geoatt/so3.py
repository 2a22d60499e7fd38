"""Rotation-group primitives: hat/vee maps, exponential map and drift repair.

Everything operates on plain numpy arrays: vectors are shape (3,) floats and
matrices shape (3, 3).  ``Rotation`` is a thin validated wrapper used where
orthonormality actually matters; the free functions accept and return bare
arrays so they compose cheaply in inner loops.
"""
from __future__ import annotations

import numpy as np

from .exceptions import Degenerate, NotSkew

__all__ = [
    "DEFAULT_ORTH_TOL",
    "Rotation",
    "hat",
    "vee",
    "exp_so3",
    "project_so3",
    "rotation_error",
    "is_rotation",
    "check_identities",
]

DEFAULT_ORTH_TOL = 1e-9

_SKEW_TOL = 1e-9


class Rotation:
    """A validated member of the rotation group.

    Wraps a 3x3 matrix and checks orthonormality and unit determinant on
    construction.  The underlying array is available as ``.m`` and is never
    copied after validation, so treat it as read-only.
    """

    __slots__ = ("m",)

    def __init__(self, m, orth_tol: float = DEFAULT_ORTH_TOL):
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {m.shape}")
        err = rotation_error(m)
        if err > orth_tol or abs(np.linalg.det(m) - 1.0) > orth_tol:
            raise Degenerate(f"matrix is not a rotation (residual {err:.3e})")
        self.m = m

    def __matmul__(self, other):
        if isinstance(other, Rotation):
            return Rotation(self.m @ other.m)
        return self.m @ other

    def __repr__(self):
        return f"Rotation({self.m.tolist()!r})"


def rotation_error(m) -> float:
    """Frobenius residual ||R'R - I||_F of a candidate rotation."""
    m = np.asarray(m, dtype=float)
    return float(np.linalg.norm(m.T @ m - np.eye(3)))


def is_rotation(m, orth_tol: float = DEFAULT_ORTH_TOL) -> bool:
    m = np.asarray(m, dtype=float)
    return rotation_error(m) <= orth_tol and abs(np.linalg.det(m) - 1.0) <= orth_tol


def hat(x) -> np.ndarray:
    """Map a 3-vector to the skew matrix so that hat(x) @ y == cross(x, y)."""
    x0, x1, x2 = np.asarray(x, dtype=float)
    return np.array([[0.0, -x2, x1], [x2, 0.0, -x0], [-x1, x0, 0.0]])


def vee(m, tol: float = _SKEW_TOL) -> np.ndarray:
    """Inverse of :func:`hat`.

    The input is antisymmetrized first; a residual above ``tol`` raises
    :class:`NotSkew`.
    """
    m = np.asarray(m, dtype=float)
    residual = float(np.linalg.norm(m + m.T))
    if residual > tol:
        raise NotSkew(f"antisymmetry residual {residual:.3e} exceeds {tol:.1e}")
    s = 0.5 * (m - m.T)
    return np.array([s[2, 1], s[0, 2], s[1, 0]])


def exp_so3(x) -> np.ndarray:
    """Matrix exponential of hat(x) via Rodrigues' formula.

    Below angle 1e-6 the sinc-style coefficients switch to their Taylor
    expansions to avoid 0/0.
    """
    x = np.asarray(x, dtype=float)
    angle = float(np.linalg.norm(x))
    k = hat(x)
    if angle < 1e-6:
        # sin(a)/a ~ 1 - a^2/6, (1-cos(a))/a^2 ~ 1/2 - a^2/24
        a2 = angle * angle
        return np.eye(3) + (1.0 - a2 / 6.0) * k + (0.5 - a2 / 24.0) * (k @ k)
    return (
        np.eye(3)
        + (np.sin(angle) / angle) * k
        + ((1.0 - np.cos(angle)) / (angle * angle)) * (k @ k)
    )


def log_so3(r) -> np.ndarray:
    """Rotation vector of R (principal branch, angle in [0, pi])."""
    r = np.asarray(r, dtype=float)
    cos_angle = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    angle = float(np.arccos(cos_angle))
    if angle < 1e-8:
        return vee(0.5 * (r - r.T), tol=np.inf)
    if angle > np.pi - 1e-6:
        # near pi the antisymmetric part degenerates; recover axis from R + I
        axis_outer = 0.5 * (r + np.eye(3))
        i = int(np.argmax(np.diag(axis_outer)))
        axis = axis_outer[:, i] / np.sqrt(axis_outer[i, i])
        sign = np.sign(vee(0.5 * (r - r.T), tol=np.inf)[i]) or 1.0
        return angle * sign * axis / np.linalg.norm(axis)
    return angle / (2.0 * np.sin(angle)) * vee(r - r.T, tol=np.inf)


def project_so3(m) -> np.ndarray:
    """Nearest rotation to ``m`` in Frobenius norm (orthogonal polar factor)."""
    m = np.asarray(m, dtype=float)
    if np.linalg.det(m) <= 0.0:
        raise Degenerate("determinant must be positive")
    u, s, vt = np.linalg.svd(m)
    if s[-1] < 1e-12 * max(s[0], 1.0):
        raise Degenerate("matrix is near rank-deficient")
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        # det(m) > 0 guards against this, but keep the projection well defined
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def check_identities(x, y, z, a, r, tol: float = 1e-12):
    """Numerically verify the hat-map identities used throughout the library.

    Returns a dict mapping identity name to its residual, plus an overall
    ``passed`` flag under key ``"passed"``.  Residuals are relative to the
    magnitude of the operands.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    a = np.asarray(a, dtype=float)
    r = np.asarray(r, dtype=float)

    hx, hy, hz = hat(x), hat(y), hat(z)
    scale = max(1.0, np.linalg.norm(x), np.linalg.norm(y), np.linalg.norm(z),
                np.linalg.norm(a))

    residuals = {
        "hat_antisymmetry": np.linalg.norm(hx @ y + hy @ x) / scale**2,
        "scalar_triple": abs(x @ (hy @ z) - y @ (hz @ x)) / scale**3,
        "cross_hat": np.linalg.norm(hat(np.cross(x, y)) - (hx @ hy - hy @ hx))
        / scale**2,
        "trace_pairing": abs(np.trace(a @ hx) + x @ vee(a - a.T, tol=np.inf))
        / scale**2,
        "hat_conjugation_sum": np.linalg.norm(
            hx @ a + a.T @ hx - hat((np.trace(a) * np.eye(3) - a) @ x)
        )
        / scale**2,
        "rotation_equivariance": np.linalg.norm(r @ hx @ r.T - hat(r @ x)) / scale,
    }
    report = {name: float(val) for name, val in residuals.items()}
    report["passed"] = all(v <= tol for v in residuals.values())
    return report
