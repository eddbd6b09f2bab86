"""Compiled scalar kernels for the arm model and the closed-loop integrator.

Everything here works on flat float arrays so numba can compile it:

    params  = [m1, m2, l1, l2, g, b1, b2, coriolis_mode]
    gains   = [kp1, ki1, kd1, kp2, ki2, kd2]
    state   = [q1, q2, qdot1, qdot2, ie1, ie2, J]

``coriolis_mode`` is 0.0 for the Lagrangian-consistent vector and 1.0 for the
second-row form as printed in the source model.
"""

import math

import numpy as np
from numba import njit

STATE_SIZE = 7

# indices into the params vector
M1, M2, L1, L2, GRAV, B1, B2, CORIOLIS_MODE = range(8)


@njit(cache=True, nogil=True)
def mass_entries(p, q2):
    m1, m2, l1, l2 = p[M1], p[M2], p[L1], p[L2]
    h = m2 * l1 * l2 * math.cos(q2)
    m22 = m2 * l2 * l2
    m11 = (m1 + m2) * l1 * l1 + m22 + 2.0 * h
    m12 = m22 + h
    return m11, m12, m22


@njit(cache=True, nogil=True)
def coriolis_entries(p, q2, w1, w2):
    h = p[M2] * p[L1] * p[L2] * math.sin(q2)
    c1 = -h * (2.0 * w1 * w2 + w2 * w2)
    if p[CORIOLIS_MODE] != 0.0:
        c2 = -h * w1 * w2
    else:
        c2 = h * w1 * w1
    return c1, c2


@njit(cache=True, nogil=True)
def gravity_entries(p, q1, q2):
    m1, m2, l1, l2, g = p[M1], p[M2], p[L1], p[L2], p[GRAV]
    g2 = -m2 * l2 * g * math.sin(q1 + q2)
    g1 = -(m1 + m2) * l1 * g * math.sin(q1) + g2
    return g1, g2


@njit(cache=True, nogil=True)
def accel(p, q1, q2, w1, w2, t1, t2):
    m11, m12, m22 = mass_entries(p, q2)
    c1, c2 = coriolis_entries(p, q2, w1, w2)
    g1, g2 = gravity_entries(p, q1, q2)
    r1 = t1 - c1 - g1 - p[B1] * w1
    r2 = t2 - c2 - g2 - p[B2] * w2
    det = m11 * m22 - m12 * m12
    return (m22 * r1 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det


@njit(cache=True, nogil=True)
def pid(gains, e1, e2, ie1, ie2, edot1, edot2, tlim):
    t1 = gains[0] * e1 + gains[1] * ie1 + gains[2] * edot1
    t2 = gains[3] * e2 + gains[4] * ie2 + gains[5] * edot2
    # tlim is +inf when no clamp is configured
    t1 = min(max(t1, -tlim), tlim)
    t2 = min(max(t2, -tlim), tlim)
    return t1, t2


@njit(cache=True, nogil=True)
def closed_loop_deriv(p, gains, qd, tlim, x, dx):
    e1 = qd[0] - x[0]
    e2 = qd[1] - x[1]
    t1, t2 = pid(gains, e1, e2, x[4], x[5], -x[2], -x[3], tlim)
    a1, a2 = accel(p, x[0], x[1], x[2], x[3], t1, t2)
    dx[0] = x[2]
    dx[1] = x[3]
    dx[2] = a1
    dx[3] = a2
    dx[4] = e1
    dx[5] = e2
    dx[6] = e1 * e1 + e2 * e2


@njit(cache=True, nogil=True)
def _all_finite(v):
    for i in range(v.shape[0]):
        if not math.isfinite(v[i]):
            return False
    return True


@njit(nogil=True)
def rk4_into(deriv, p, gains, qd, tlim, x, dt, out, k1, k2, k3, k4, tmp):
    """One classical RK4 step from ``x`` into ``out``; False on a non-finite derivative."""
    n = x.shape[0]
    deriv(p, gains, qd, tlim, x, k1)
    if not _all_finite(k1):
        return False
    for i in range(n):
        tmp[i] = x[i] + 0.5 * dt * k1[i]
    deriv(p, gains, qd, tlim, tmp, k2)
    if not _all_finite(k2):
        return False
    for i in range(n):
        tmp[i] = x[i] + 0.5 * dt * k2[i]
    deriv(p, gains, qd, tlim, tmp, k3)
    if not _all_finite(k3):
        return False
    for i in range(n):
        tmp[i] = x[i] + dt * k3[i]
    deriv(p, gains, qd, tlim, tmp, k4)
    if not _all_finite(k4):
        return False
    for i in range(n):
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return True


@njit(nogil=True)
def integrate(deriv, p, gains, qd, tlim, dt, blowup, traj):
    """Fill ``traj[1:]`` from ``traj[0]``.

    Returns the number of valid rows and a diverged flag. On divergence the
    offending row is not counted.
    """
    n = traj.shape[1]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for k in range(traj.shape[0] - 1):
        ok = rk4_into(deriv, p, gains, qd, tlim, traj[k], dt, traj[k + 1], k1, k2, k3, k4, tmp)
        if not ok:
            return k + 1, True
        row = traj[k + 1]
        for i in range(n):
            if not math.isfinite(row[i]):
                return k + 1, True
        for i in range(4):
            if abs(row[i]) > blowup:
                return k + 1, True
    return traj.shape[0], False


@njit(nogil=True)
def final_state(deriv, p, gains, qd, tlim, x0, dt, n_steps, blowup):
    """Integrate without storing the trajectory; return (x_final, diverged)."""
    n = x0.shape[0]
    x = x0.copy()
    y = np.empty(n)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for _ in range(n_steps):
        if not rk4_into(deriv, p, gains, qd, tlim, x, dt, y, k1, k2, k3, k4, tmp):
            return x, True
        if not _all_finite(y):
            return y, True
        for i in range(4):
            if abs(y[i]) > blowup:
                return y, True
        x, y = y, x
    return x, False
