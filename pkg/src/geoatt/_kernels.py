"""Compiled inner loop for the closed-loop simulation.

The hot path (RK4 substeps with the feedback law evaluated at every stage)
is written against plain float64 arrays and jitted with numba.  Only the
built-in disturbance kinds (none / constant / constant-plus-sinusoid with
identity input matrix) are supported here; anything else falls back to the
pure-numpy evaluator in :mod:`geoatt.sim`.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a soft dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap


DIST_NONE = 0
DIST_CONSTANT = 1
DIST_TIME_VARYING = 2


@njit(cache=True)
def _exp_so3(x):
    angle = np.sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    k = np.empty((3, 3))
    k[0, 0] = 0.0
    k[0, 1] = -x[2]
    k[0, 2] = x[1]
    k[1, 0] = x[2]
    k[1, 1] = 0.0
    k[1, 2] = -x[0]
    k[2, 0] = -x[1]
    k[2, 1] = x[0]
    k[2, 2] = 0.0
    if angle < 1e-6:
        a2 = angle * angle
        c1 = 1.0 - a2 / 6.0
        c2 = 0.5 - a2 / 24.0
    else:
        c1 = np.sin(angle) / angle
        c2 = (1.0 - np.cos(angle)) / (angle * angle)
    k2 = k @ k
    out = c1 * k + c2 * k2
    out[0, 0] += 1.0
    out[1, 1] += 1.0
    out[2, 2] += 1.0
    return out


@njit(cache=True)
def _cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@njit(cache=True)
def errors(R, Rd, g, r, V, cos_th, alpha):
    """Error geometry at R: (A, B per cone, psi, e_R, violated cone or -1)."""
    k = V.shape[0]
    b = np.empty(k)
    m = Rd.T @ R
    a = 0.5 * (g[0] * (1.0 - m[0, 0]) + g[1] * (1.0 - m[1, 1])
               + g[2] * (1.0 - m[2, 2]))
    era = np.empty(3)
    era[0] = 0.5 * (g[2] * m[2, 1] - g[1] * m[1, 2])
    era[1] = 0.5 * (g[0] * m[0, 2] - g[2] * m[2, 0])
    era[2] = 0.5 * (g[1] * m[1, 0] - g[0] * m[0, 1])

    erb_sum = np.zeros(3)
    scale = 1.0
    for i in range(k):
        rtv = R.T @ V[i]
        s = r[0] * rtv[0] + r[1] * rtv[1] + r[2] * rtv[2]
        margin = cos_th[i] - s
        if margin <= 1e-12:
            return a, b, 0.0, era, i
        b[i] = 1.0 - np.log(margin / (1.0 + cos_th[i])) / alpha
        scale += b[i] - 1.0
        denom = alpha * (s - cos_th[i])
        cr = _cross(rtv, r)
        erb_sum[0] += cr[0] / denom
        erb_sum[1] += cr[1] / denom
        erb_sum[2] += cr[2] / denom
    e_r = era * scale + a * erb_sum
    return a, b, a * scale, e_r, -1


@njit(cache=True)
def _delta_true(t, kind, base, amp):
    d = np.zeros(3)
    if kind == DIST_NONE:
        return d
    d[0] = base[0]
    d[1] = base[1]
    d[2] = base[2]
    if kind == DIST_TIME_VARYING:
        s = np.sin(9.0 * t)
        c = np.cos(9.0 * t)
        d[0] += amp * s
        d[1] += amp * c
        d[2] += amp * 0.5 * (s + c)
    return d


@njit(cache=True)
def _rates(sigma, omega, delta_bar, R0, Rd, t,
           g, r, V, cos_th, alpha, J, J_inv,
           kR, kOm, kD, c, adaptive,
           dist_kind, dist_base, dist_amp):
    R = R0 @ _exp_so3(sigma)
    a, b, psi, e_r, viol = errors(R, Rd, g, r, V, cos_th, alpha)
    zero = np.zeros(3)
    if viol >= 0:
        return zero, zero, zero, viol

    jw = J @ omega
    gyro = _cross(omega, jw)
    u = -kR * e_r - kOm * omega + gyro
    # gyroscopic and gravity terms cancel between control and dynamics,
    # leaving the net closed-loop torque
    torque = u - gyro
    d = _delta_true(t, dist_kind, dist_base, dist_amp)
    if adaptive:
        torque = torque + (d - delta_bar)
    else:
        torque = torque + d
    omega_dot = J_inv @ torque

    c1 = _cross(sigma, omega)
    c2 = _cross(sigma, c1)
    sigma_dot = omega - 0.5 * c1 + c2 / 12.0

    if adaptive:
        delta_dot = kD * (omega + c * e_r)
    else:
        delta_dot = zero
    return sigma_dot, omega_dot, delta_dot, -1


@njit(cache=True)
def advance(R, omega, delta_bar, Rd, t, h, n,
            g, r, V, cos_th, alpha, J, J_inv,
            kR, kOm, kD, c, adaptive,
            dist_kind, dist_base, dist_amp):
    """n RK4 substeps of size h from time t; returns (R, omega, delta_bar, viol)."""
    zero = np.zeros(3)
    for _ in range(n):
        s1, w1, d1, v1 = _rates(zero, omega, delta_bar, R, Rd, t,
                                g, r, V, cos_th, alpha, J, J_inv,
                                kR, kOm, kD, c, adaptive,
                                dist_kind, dist_base, dist_amp)
        if v1 >= 0:
            return R, omega, delta_bar, v1
        s2, w2, d2, v2 = _rates(0.5 * h * s1, omega + 0.5 * h * w1,
                                delta_bar + 0.5 * h * d1, R, Rd, t + 0.5 * h,
                                g, r, V, cos_th, alpha, J, J_inv,
                                kR, kOm, kD, c, adaptive,
                                dist_kind, dist_base, dist_amp)
        if v2 >= 0:
            return R, omega, delta_bar, v2
        s3, w3, d3, v3 = _rates(0.5 * h * s2, omega + 0.5 * h * w2,
                                delta_bar + 0.5 * h * d2, R, Rd, t + 0.5 * h,
                                g, r, V, cos_th, alpha, J, J_inv,
                                kR, kOm, kD, c, adaptive,
                                dist_kind, dist_base, dist_amp)
        if v3 >= 0:
            return R, omega, delta_bar, v3
        s4, w4, d4, v4 = _rates(h * s3, omega + h * w3, delta_bar + h * d3,
                                R, Rd, t + h,
                                g, r, V, cos_th, alpha, J, J_inv,
                                kR, kOm, kD, c, adaptive,
                                dist_kind, dist_base, dist_amp)
        if v4 >= 0:
            return R, omega, delta_bar, v4
        sigma = h / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
        omega = omega + h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
        delta_bar = delta_bar + h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        R = R @ _exp_so3(sigma)
        t += h
    return R, omega, delta_bar, -1
