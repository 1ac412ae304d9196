"""Numeric kernels shared by every public module.

Everything here works on flat float64 arrays so the same source runs under
numba or as plain numpy.  Layouts:

params  (13): m, ell, J_psi, J_theta, J_phi, C_prop,
              a_x, a_y, a_z, a_psi, a_theta, a_phi, g
plant   (12): x, y, z, vx, vy, vz, psi, theta, phi, psi_dot, theta_dot, phi_dot
ext      (4): u1, u2, rho1, rho2
setpoint (4): x*, y*, z*, phi*
zeta    (16): four blocks, each ordered (z, phi, x, y)
U        (4): v1, v2, u3, u4
closed-loop state (36): plant, ext, zeta_hat (16), sigma (4)

``cg`` is the channel gain on the angular accelerations (psi, theta, phi).
It is one for a plant that matches the mixer's parameters and differs from
one only when the simulated plant has perturbed inertias.
"""
import math

import numpy as np

from ._jit import njit

P_M, P_ELL, P_JPSI, P_JTHETA, P_JPHI, P_C = 0, 1, 2, 3, 4, 5
P_AX, P_AY, P_AZ, P_APSI, P_ATHETA, P_APHI, P_G = 6, 7, 8, 9, 10, 11, 12

MODE_STATE = 0
MODE_OUTPUT = 1

STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_NONFINITE = 2
STATUS_DEGENERATE_B4 = 3

DET_B4_MIN = 1e-9

NX = 36


# ---------------------------------------------------------------- geometry

@njit
def thrust_dir(psi, theta, phi):
    cps, sps = math.cos(psi), math.sin(psi)
    cth, sth = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    t = np.empty(3)
    t[0] = cph * sth * cps + sph * sps
    t[1] = sph * sth * cps - cph * sps
    t[2] = cth * cps
    return t


@njit
def thrust_jac(psi, theta, phi):
    """Columns are d/dpsi, d/dtheta, d/dphi of the thrust direction."""
    cps, sps = math.cos(psi), math.sin(psi)
    cth, sth = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    J = np.empty((3, 3))
    J[0, 0] = -cph * sth * sps + sph * cps
    J[0, 1] = cph * cth * cps
    J[0, 2] = -sph * sth * cps + cph * sps
    J[1, 0] = -sph * sth * sps - cph * cps
    J[1, 1] = sph * cth * cps
    J[1, 2] = cph * sth * cps + sph * sps
    J[2, 0] = -cth * sps
    J[2, 1] = -sth * cps
    J[2, 2] = 0.0
    return J


@njit
def thrust_hess_quad(psi, theta, phi, w):
    """sum_ij d2t/(dq_i dq_j) w_i w_j for q = (psi, theta, phi)."""
    cps, sps = math.cos(psi), math.sin(psi)
    cth, sth = math.cos(theta), math.sin(theta)
    cph, sph = math.cos(phi), math.sin(phi)
    wp, wt, wf = w[0], w[1], w[2]
    out = np.empty(3)
    # x component
    hpp = -cph * sth * cps - sph * sps
    htt = -cph * sth * cps
    hff = -cph * sth * cps - sph * sps
    hpt = -cph * cth * sps
    hpf = sph * sth * sps + cph * cps
    htf = -sph * cth * cps
    out[0] = hpp * wp * wp + htt * wt * wt + hff * wf * wf + 2.0 * (hpt * wp * wt + hpf * wp * wf + htf * wt * wf)
    # y component
    hpp = -sph * sth * cps + cph * sps
    htt = -sph * sth * cps
    hff = -sph * sth * cps + cph * sps
    hpt = -sph * cth * sps
    hpf = -cph * sth * sps + sph * cps
    htf = cph * cth * cps
    out[1] = hpp * wp * wp + htt * wt * wt + hff * wf * wf + 2.0 * (hpt * wp * wt + hpf * wp * wf + htf * wt * wf)
    # z component (no phi dependence)
    hpp = -cth * cps
    htt = -cth * cps
    hpt = sth * sps
    out[2] = hpp * wp * wp + htt * wt * wt + 2.0 * hpt * wp * wt
    return out


# ------------------------------------------------------------ plant, mixer

@njit
def plant_deriv(s, F, P):
    d = np.empty(12)
    d[0] = s[3]
    d[1] = s[4]
    d[2] = s[5]
    t = thrust_dir(s[6], s[7], s[8])
    acc = (F[0] + F[1] + F[2] + F[3]) / P[P_M]
    d[3] = -P[P_AX] * s[3] + acc * t[0]
    d[4] = -P[P_AY] * s[4] + acc * t[1]
    d[5] = -P[P_AZ] * s[5] + acc * t[2] - P[P_G]
    d[6] = s[9]
    d[7] = s[10]
    d[8] = s[11]
    tau_psi = -F[0] + F[1] + F[2] - F[3]
    tau_theta = -F[0] - F[1] + F[2] + F[3]
    tau_phi = F[0] - F[1] + F[2] - F[3]
    d[9] = -P[P_APSI] * s[9] + P[P_ELL] / P[P_JPSI] * tau_psi
    d[10] = -P[P_ATHETA] * s[10] + P[P_ELL] / P[P_JTHETA] * tau_theta
    d[11] = -P[P_APHI] * s[11] + P[P_C] / P[P_JPHI] * tau_phi
    return d


@njit
def allocate(u, P):
    w0 = P[P_M] * (u[0] + P[P_G])
    w1 = P[P_JPHI] / P[P_C] * u[1]
    w2 = P[P_JPSI] / P[P_ELL] * u[2]
    w3 = P[P_JTHETA] / P[P_ELL] * u[3]
    F = np.empty(4)
    F[0] = 0.25 * (w0 + w1 - w2 - w3)
    F[1] = 0.25 * (w0 - w1 + w2 - w3)
    F[2] = 0.25 * (w0 + w1 + w2 + w3)
    F[3] = 0.25 * (w0 - w1 - w2 + w3)
    return F


@njit
def channels_from_forces(F, P):
    # the sign matrix S satisfies S S^T = 4 I, so S^T inverts allocate
    u = np.empty(4)
    u[0] = (F[0] + F[1] + F[2] + F[3]) / P[P_M] - P[P_G]
    u[1] = (F[0] - F[1] + F[2] - F[3]) * P[P_C] / P[P_JPHI]
    u[2] = (-F[0] + F[1] + F[2] - F[3]) * P[P_ELL] / P[P_JPSI]
    u[3] = (-F[0] - F[1] + F[2] + F[3]) * P[P_ELL] / P[P_JTHETA]
    return u


# ------------------------------------------------------------ normal form

@njit
def _output_accel(s, ext, P, cg):
    """Accelerations and jerks of (z, phi, x, y) plus reusable pieces."""
    beta = ext[0] + P[P_G]
    t = thrust_dir(s[6], s[7], s[8])
    J = thrust_jac(s[6], s[7], s[8])
    w = s[9:12]
    td = J @ w
    acc = np.empty(3)
    acc[0] = -P[P_AX] * s[3] + beta * t[0]
    acc[1] = -P[P_AY] * s[4] + beta * t[1]
    acc[2] = -P[P_AZ] * s[5] + beta * t[2] - P[P_G]
    jerk = np.empty(3)
    jerk[0] = -P[P_AX] * acc[0] + ext[2] * t[0] + beta * td[0]
    jerk[1] = -P[P_AY] * acc[1] + ext[2] * t[1] + beta * td[1]
    jerk[2] = -P[P_AZ] * acc[2] + ext[2] * t[2] + beta * td[2]
    phidd = -P[P_APHI] * s[11] + cg[2] * ext[1]
    phiddd = -P[P_APHI] * phidd + cg[2] * ext[3]
    return beta, t, J, td, acc, jerk, phidd, phiddd


@njit
def zeta(s, ext, sp, P, cg):
    beta, t, J, td, acc, jerk, phidd, phiddd = _output_accel(s, ext, P, cg)
    z = np.empty(16)
    z[0] = s[2] - sp[2]
    z[1] = s[8] - sp[3]
    z[2] = s[0] - sp[0]
    z[3] = s[1] - sp[1]
    z[4] = s[5]
    z[5] = s[11]
    z[6] = s[3]
    z[7] = s[4]
    z[8] = acc[2]
    z[9] = phidd
    z[10] = acc[0]
    z[11] = acc[1]
    z[12] = jerk[2]
    z[13] = phiddd
    z[14] = jerk[0]
    z[15] = jerk[1]
    return z


@njit
def zeta4_dot(s, ext, U, P, cg):
    """Closed-form fourth derivative of (z, phi, x, y) for input U."""
    beta, t, J, td, acc, jerk, phidd, phiddd = _output_accel(s, ext, P, cg)
    w = s[9:12]
    wdot = np.empty(3)
    wdot[0] = -P[P_APSI] * s[9] + cg[0] * U[2]
    wdot[1] = -P[P_ATHETA] * s[10] + cg[1] * U[3]
    wdot[2] = phidd
    tdd = thrust_hess_quad(s[6], s[7], s[8], w) + J @ wdot
    a = np.empty(3)
    a[0] = P[P_AX]
    a[1] = P[P_AY]
    a[2] = P[P_AZ]
    snap = -a * jerk + U[0] * t + 2.0 * ext[2] * td + beta * tdd
    out = np.empty(4)
    out[0] = snap[2]
    out[1] = -P[P_APHI] * phiddd + cg[2] * U[1]
    out[2] = snap[0]
    out[3] = snap[1]
    return out


@njit
def q4_b4(s, ext, P, cg):
    # zeta4_dot is affine in U, so unit probes recover b4 exactly
    U = np.zeros(4)
    q4 = zeta4_dot(s, ext, U, P, cg)
    b4 = np.empty((4, 4))
    for j in range(4):
        U[:] = 0.0
        U[j] = 1.0
        b4[:, j] = zeta4_dot(s, ext, U, P, cg) - q4
    return q4, b4


@njit
def b4_origin(phi, g):
    c, s = math.cos(phi), math.sin(phi)
    b = np.zeros((4, 4))
    b[0, 0] = 1.0
    b[1, 1] = 1.0
    b[2, 2] = g * s
    b[2, 3] = g * c
    b[3, 2] = -g * c
    b[3, 3] = g * s
    return b


@njit
def b4_origin_solve(phi, g, r):
    """b4_origin(phi)^-1 @ r without forming the inverse."""
    c, s = math.cos(phi), math.sin(phi)
    x = np.empty(4)
    x[0] = r[0]
    x[1] = r[1]
    x[2] = (s * r[2] - c * r[3]) / g
    x[3] = (c * r[2] + s * r[3]) / g
    return x


# ---------------------------------------------------------------- control

@njit
def smooth_sat(x, N):
    return N * np.tanh(x / N)


@njit
def linear_feedback(z, gam):
    r = np.empty(4)
    for i in range(4):
        r[i] = -(gam[0] * z[i] + gam[1] * z[4 + i] + gam[2] * z[8 + i] + gam[3] * z[12 + i])
    return r


@njit
def state_feedback(z, q4, b4, gam):
    """Returns (U, status); status flags a numerically singular b4."""
    if abs(np.linalg.det(b4)) < DET_B4_MIN:
        return np.full(4, np.nan), STATUS_DEGENERATE_B4
    rhs = linear_feedback(z, gam) - q4
    return np.linalg.solve(b4, rhs), STATUS_OK


@njit
def output_feedback(zh, sig, phi, gam, N, g):
    r = linear_feedback(zh, gam) - sig
    return smooth_sat(b4_origin_solve(phi, g, r), N)


@njit
def observer_deriv(zh, sig, y, phi, U, kappa, acoef, g):
    """acoef = (a4, a3, a2, a1, a0)."""
    d = np.empty(20)
    bU = b4_origin(phi, g) @ U
    k = 1.0
    for blk in range(4):
        k *= kappa
        for i in range(4):
            e = y[i] - zh[i]
            if blk < 3:
                d[4 * blk + i] = zh[4 * (blk + 1) + i] + k * acoef[blk] * e
            else:
                d[12 + i] = sig[i] + bU[i] + k * acoef[3] * e
    k *= kappa
    for i in range(4):
        d[16 + i] = k * acoef[4] * (y[i] - zh[i])
    return d


# ------------------------------------------------------ closed-loop system

@njit
def measured_output(X, sp, noise_row):
    y = np.empty(4)
    y[0] = X[2] - sp[2] + noise_row[0]
    y[1] = X[8] - sp[3] + noise_row[1]
    y[2] = X[0] - sp[0] + noise_row[2]
    y[3] = X[1] - sp[1] + noise_row[3]
    return y


@njit
def control(X, y, mode, sp, Pc, gam, N):
    if mode == MODE_STATE:
        ones = np.ones(3)
        z = zeta(X[0:12], X[12:16], sp, Pc, ones)
        q4, b4 = q4_b4(X[0:12], X[12:16], Pc, ones)
        return state_feedback(z, q4, b4, gam)
    return output_feedback(X[16:32], X[32:36], y[1] + sp[3], gam, N, Pc[P_G]), STATUS_OK


@njit
def applied_forces(X, U, Pc, clamp):
    u = np.empty(4)
    u[0] = X[12]
    u[1] = X[13]
    u[2] = U[2]
    u[3] = U[3]
    F = allocate(u, Pc)
    if clamp:
        F = np.maximum(F, 0.0)
    return F


@njit
def closed_loop_rhs(X, U, y, mode, sp, Pp, Pc, acoef, kappa, clamp):
    d = np.zeros(NX)
    F = applied_forces(X, U, Pc, clamp)
    d[0:12] = plant_deriv(X[0:12], F, Pp)
    d[12] = X[14]
    d[13] = X[15]
    d[14] = U[0]
    d[15] = U[1]
    if mode == MODE_OUTPUT:
        d[16:36] = observer_deriv(X[16:32], X[32:36], y, y[1] + sp[3], U, kappa, acoef, Pc[P_G])
    return d


@njit
def _stage(X, noise_row, U_hold, hold, mode, sp, Pp, Pc, gam, N, acoef, kappa, clamp):
    y = measured_output(X, sp, noise_row)
    if hold:
        U = U_hold
        st = STATUS_OK
    else:
        U, st = control(X, y, mode, sp, Pc, gam, N)
    return closed_loop_rhs(X, U, y, mode, sp, Pp, Pc, acoef, kappa, clamp), st


@njit
def simulate(X0, n_steps, dt, mode, sp, Pp, Pc, cg, gam, N, acoef, kappa,
             clamp, hold, noise, guard):
    """Fixed-step RK4 over the coupled plant/extension/observer system.

    Returns logs sized n_steps + 1 and the number of valid rows; rows past
    that count are garbage when the run aborts.
    """
    n = n_steps + 1
    Xs = np.empty((n, NX))
    Us = np.empty((n, 4))
    Fs = np.empty((n, 4))
    Zs = np.empty((n, 16))
    neg = np.zeros(n, dtype=np.bool_)
    margin = np.empty(n)
    X = X0.copy()
    status = STATUS_OK
    n_done = 0
    for k in range(n):
        if not np.all(np.isfinite(X)):
            status = STATUS_NONFINITE
            break
        m = math.cos(X[7]) * math.cos(X[6]) - guard
        if m <= 0.0:
            status = STATUS_SINGULAR
            break
        y = measured_output(X, sp, noise[k])
        if k == 0 and mode == MODE_OUTPUT:
            X[16:20] = y
            X[20:36] = 0.0
        U, st = control(X, y, mode, sp, Pc, gam, N)
        if st != STATUS_OK:
            status = st
            break
        F_raw = applied_forces(X, U, Pc, False)
        Xs[k] = X
        Us[k] = U
        Fs[k] = applied_forces(X, U, Pc, clamp)
        Zs[k] = zeta(X[0:12], X[12:16], sp, Pp, cg)
        neg[k] = np.any(F_raw < 0.0)
        margin[k] = m
        n_done = k + 1
        if k == n_steps:
            break
        k1, s1 = _stage(X, noise[k], U, hold, mode, sp, Pp, Pc, gam, N, acoef, kappa, clamp)
        k2, s2 = _stage(X + 0.5 * dt * k1, noise[k], U, hold, mode, sp, Pp, Pc, gam, N, acoef, kappa, clamp)
        k3, s3 = _stage(X + 0.5 * dt * k2, noise[k], U, hold, mode, sp, Pp, Pc, gam, N, acoef, kappa, clamp)
        k4, s4 = _stage(X + dt * k3, noise[k], U, hold, mode, sp, Pp, Pc, gam, N, acoef, kappa, clamp)
        st = max(max(s1, s2), max(s3, s4))
        if st != STATUS_OK:
            status = st
            break
        X = X + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Xs, Us, Fs, Zs, neg, margin, n_done, status
