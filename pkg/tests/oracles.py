"""Independent reference implementations used only by the tests.

Nothing here calls into quadnorm's kernels: the plant is rebuilt from
rotation matrices, the mixer from a dense linear solve, spectra from exact
rational characteristic polynomials.
"""
import numpy as np
import sympy


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def thrust_axis(psi, theta, phi):
    """Body z axis for heading phi (outer), pitch theta, yaw psi (inner)."""
    return rot_z(phi) @ rot_y(theta) @ rot_x(psi) @ np.array([0.0, 0.0, 1.0])


MIX_ROWS = np.array([[-1, 1, 1, -1], [-1, -1, 1, 1], [1, -1, 1, -1]], dtype=float)
ALLOC_SIGNS = np.array([[1, 1, -1, -1], [1, -1, 1, -1], [1, 1, 1, 1], [1, -1, -1, 1]], dtype=float)


def plant_rhs(s, F, p):
    """Right-hand side of the rigid-body model from its matrix form."""
    s = np.asarray(s, dtype=float)
    F = np.asarray(F, dtype=float)
    pos, vel, ang, rate = s[0:3], s[3:6], s[6:9], s[9:12]
    acc = (-np.diag([p.a_x, p.a_y, p.a_z]) @ vel
           + F.sum() / p.m * thrust_axis(*ang) - np.array([0, 0, p.g]))
    gains = np.diag([p.ell / p.J_psi, p.ell / p.J_theta, p.C_prop / p.J_phi])
    angacc = -np.diag([p.a_psi, p.a_theta, p.a_phi]) @ rate + gains @ MIX_ROWS @ F
    return np.concatenate([vel, acc, rate, angacc])


def alloc_matrix(p):
    D = np.diag([p.m, p.J_phi / p.C_prop, p.J_psi / p.ell, p.J_theta / p.ell])
    return 0.25 * ALLOC_SIGNS @ D


def forces_from_channels(u, p):
    u = np.asarray(u, dtype=float)
    return alloc_matrix(p) @ np.array([u[0] + p.g, u[1], u[2], u[3]])


def channels_by_solve(F, p):
    w = np.linalg.solve(alloc_matrix(p), np.asarray(F, dtype=float))
    return np.array([w[0] - p.g, w[1], w[2], w[3]])


def extended_rhs(x, U, p):
    """Plant + double integrators on (u1, u2); U = (v1, v2, u3, u4)."""
    s, e = x[:12], x[12:16]
    F = forces_from_channels([e[0], e[1], U[2], U[3]], p)
    return np.concatenate([plant_rhs(s, F, p), [e[2], e[3], U[0], U[1]]])


def rk4(f, x, t, h):
    k1 = f(t, x)
    k2 = f(t + h / 2, x + h / 2 * k1)
    k3 = f(t + h / 2, x + h / 2 * k2)
    k4 = f(t + h, x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def exact_spectrum(M, digits=30):
    """Eigenvalues with multiplicity from the exact rational charpoly.

    Floating-point entries are converted to their exact binary rationals, so
    repeated roots come out exactly instead of as an O(eps^(1/k)) cloud.
    """
    A = sympy.Matrix(np.asarray(M).shape[0], np.asarray(M).shape[1],
                     [sympy.Rational(float(v)) for v in np.asarray(M).ravel()])
    lam = sympy.Symbol("lam")
    poly = sympy.Poly(A.charpoly(lam).as_expr(), lam)
    _, factors = sympy.sqf_list(poly)
    out = []
    for fac, mult in factors:
        for r in sympy.Poly(fac, lam).nroots(n=digits):
            out += [complex(r)] * mult
    return np.array(out)


def match_multiset(found, expected):
    """Max distance under the best greedy pairing of two equal-size multisets."""
    found = list(np.asarray(found, dtype=complex))
    worst = 0.0
    for e in np.asarray(expected, dtype=complex):
        d = [abs(f - e) for f in found]
        i = int(np.argmin(d))
        worst = max(worst, d[i])
        found.pop(i)
    assert not found
    return worst


def expand_poly(roots):
    """Monic polynomial coefficients by repeated multiplication (highest first)."""
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.convolve(c, [1.0, -r])
    return c


def sinusoidal_control(rng, amp=(0.5, 0.5, 2.0, 2.0)):
    """Smooth open-loop U(t) = sum of two random sinusoids per channel."""
    a = rng.uniform(-1, 1, (2, 4)) * np.asarray(amp)
    w = rng.uniform(0.5, 3.0, (2, 4))
    ph = rng.uniform(0, 2 * np.pi, (2, 4))
    return lambda t: np.sum(a * np.sin(w * t + ph), axis=0)


def integrate_extended(x0, U_of_t, p, T, dt):
    f = lambda t, x: extended_rhs(x, U_of_t(t), p)
    xs = [np.asarray(x0, dtype=float)]
    n = int(round(T / dt))
    for k in range(n):
        xs.append(rk4(f, xs[-1], k * dt, dt))
    return np.arange(n + 1) * dt, np.array(xs)


def neighbours(x, t, U_of_t, p, h):
    """States at t - h and t + h from one RK4 step each way (local error O(h^5))."""
    f = lambda tt, xx: extended_rhs(xx, U_of_t(tt), p)
    return rk4(f, x, t, -h), rk4(f, x, t, h)
