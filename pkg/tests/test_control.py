import numpy as np
import pytest
import scipy.linalg
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import quadnorm as q
from quadnorm.control import FeedbackGains, closed_loop_matrix, gains_from_poles
from quadnorm.errors import DegenerateB4Error, InvalidPoles
from oracles import exact_spectrum, match_multiset


def test_gains_repeated_pole():
    g = gains_from_poles([-1, -1, -1, -1])
    np.testing.assert_array_equal(g.as_array(), [1, 4, 6, 4])


def test_gains_distinct_poles():
    g = gains_from_poles([-1, -2, -3, -4])
    np.testing.assert_allclose(g.as_array(), [24, 50, 35, 10], rtol=1e-15)


def test_butterworth_against_quadratic_factors():
    c1, c3 = 2 * np.cos(np.pi / 8), 2 * np.cos(3 * np.pi / 8)
    # (s^2 + c1 s + 1)(s^2 + c3 s + 1)
    expected = np.polymul([1, c1, 1], [1, c3, 1])
    g = FeedbackGains.butterworth(1.0)
    np.testing.assert_allclose(g.as_array(), expected[::-1][:4], atol=1e-12)


def test_newton_preset():
    np.testing.assert_allclose(FeedbackGains.newton(2.0).as_array(), [16, 32, 24, 8])


@pytest.mark.parametrize("poles", [
    [-1, -1, -1, 0.0],
    [-1, -1, -1, 2],
    [-1 + 1j, -1 + 1j, -2, -3],
    [-1, -2, -3],
    [-1, -2, -3, -4, -5],
])
def test_invalid_poles(poles):
    with pytest.raises(InvalidPoles):
        gains_from_poles(poles)


def test_non_hurwitz_gains_rejected():
    # s^4 + s^3 + s^2 + s + 1 has roots on the right half plane
    with pytest.raises(InvalidPoles):
        FeedbackGains(1, 1, 1, 1)
    with pytest.raises(InvalidPoles):
        FeedbackGains(-1, 4, 6, 4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.2, 5.0), min_size=2, max_size=2), st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_roots_recover_poles(reals, a, b):
    # coincident roots split by ~sqrt(eps) once coefficients are rounded
    assume(abs(reals[0] - reals[1]) >= 0.05)
    poles = [-reals[0], -reals[1], complex(-a, b), complex(-a, -b)]
    g = gains_from_poles(poles)
    c = np.concatenate([[1.0], g.as_array()[::-1]])
    # exact rational polynomial, roots to 30 digits
    lam = sympy.Symbol("lam")
    poly = sympy.Poly([sympy.Rational(float(v)) for v in c], lam)
    roots = []
    for fac, m in sympy.sqf_list(poly)[1]:
        roots += [complex(r) for r in sympy.Poly(fac, lam).nroots(n=30)] * m
    assert match_multiset(roots, poles) <= 1e-9 * max(1, max(abs(p) for p in poles)) ** 2


def test_roots_recover_repeated_pole_exactly():
    g = gains_from_poles([-2.0] * 4)
    lam = sympy.Symbol("lam")
    c = [1] + [sympy.Rational(float(v)) for v in g.as_array()[::-1]]
    assert sympy.factor(sympy.Poly(c, lam).as_expr()) == (lam + 2) ** 4


def test_state_feedback_origin():
    U = q.state_feedback(np.zeros(16), q.Q4B4(np.zeros(4), np.eye(4)), FeedbackGains.newton())
    np.testing.assert_array_equal(U, 0)


def test_state_feedback_identity_b4():
    z = np.zeros(16)
    z[0] = 1.0
    U = q.state_feedback(z, q.Q4B4(np.zeros(4), np.eye(4)), FeedbackGains.newton())
    np.testing.assert_array_equal(U, [-1, 0, 0, 0])


def test_state_feedback_residual(rng):
    g = FeedbackGains.newton(1.5)
    for _ in range(200):
        z = rng.normal(size=16)
        qb = q.Q4B4(rng.normal(size=4), rng.normal(size=(4, 4)) + 3 * np.eye(4))
        U = q.state_feedback(z, qb, g)
        lin = sum(gk * z[4 * k:4 * k + 4] for k, gk in enumerate(g.as_array()))
        assert np.linalg.norm(qb.b4 @ U + qb.q4 + lin) <= 1e-10


def test_state_feedback_degenerate():
    with pytest.raises(DegenerateB4Error):
        q.state_feedback(np.ones(16), q.Q4B4(np.zeros(4), np.zeros((4, 4))), FeedbackGains.newton())


def test_ideal_chain_is_linearized():
    """Integrating zeta' = (zeta2, zeta3, zeta4, q4 + b4 U) with U from the
    exact law reproduces the linear companion system."""
    g = FeedbackGains.newton(1.0)
    A = closed_loop_matrix(g)

    def q4b4(z):
        q4 = np.sin(z[:4]) * z[4:8] + z[12:16] ** 2
        b4 = np.eye(4) * (2 + np.cos(z[0])) + 0.3 * np.outer(np.tanh(z[8:12]), np.ones(4)) * np.eye(4)[::-1]
        return q4, b4

    def f(t, z):
        q4, b4 = q4b4(z)
        U = q.state_feedback(z, q.Q4B4(q4, b4), g)
        return np.concatenate([z[4:], q4 + b4 @ U])

    z0 = np.array([1.0, -0.5, 0.3, 0.2] + [0.1] * 4 + [0.0] * 8)
    z, dt = z0.copy(), 1e-3
    worst = 0.0
    for k in range(10000):
        z = q.rk4_step(f, z, k * dt, dt)
        if (k + 1) % 500 == 0:
            worst = max(worst, np.max(np.abs(z - scipy.linalg.expm(A * (k + 1) * dt) @ z0)))
    assert worst <= 1e-8


def test_smooth_sat_basics():
    N = 3.0
    np.testing.assert_array_equal(q.smooth_sat(np.zeros(4), N), 0)
    big = q.smooth_sat(np.array([1e6, -1e6]), N)
    np.testing.assert_allclose(big, [N, -N])
    x = np.array([0.01 * N, -0.01 * N])
    np.testing.assert_allclose(q.smooth_sat(x, N), x, rtol=1e-4)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(0.1, 100))
def test_smooth_sat_odd_bounded_lipschitz(a, b, N):
    sa, sb = q.smooth_sat(np.array([a, b]), N)
    assert abs(sa) <= N and abs(sb) <= N
    assert q.smooth_sat(np.array([-a]), N)[0] == -sa
    assert abs(sa - sb) <= abs(a - b) * (1 + 1e-12) + 1e-12


def test_smooth_sat_strict_inside_for_moderate_inputs():
    assert np.all(np.abs(q.smooth_sat(np.linspace(-5, 5, 11), 2.0)) < 2.0)


def test_output_feedback_zero(params):
    U = q.output_feedback(np.zeros(20), 0.7, FeedbackGains.newton(), 10.0, params)
    np.testing.assert_array_equal(U, 0)


def test_output_feedback_bound(rng, params):
    N = 2.0
    for _ in range(100):
        U = q.output_feedback(rng.normal(scale=50, size=20), rng.uniform(-4, 4), FeedbackGains.newton(2), N, params)
        assert np.all(np.abs(U) < N + 1e-12)


def test_output_feedback_small_signal_is_linear(rng, params):
    g = FeedbackGains.newton(1.0)
    N = 5 * params.g
    for _ in range(50):
        obs = rng.normal(scale=1e-3, size=20)
        phi = rng.uniform(-np.pi, np.pi)
        zh, sig = obs[:16], obs[16:]
        lin = sum(gk * zh[4 * k:4 * k + 4] for k, gk in enumerate(g.as_array()))
        raw = np.linalg.solve(q.b4_at_origin(phi, params), -sig - lin)
        assert np.max(np.abs(raw)) <= 0.01 * N
        np.testing.assert_allclose(q.output_feedback(obs, phi, g, N, params), raw, rtol=1e-4)


def test_output_feedback_heading_periodic(rng, params):
    g = FeedbackGains.newton(1.0)
    obs = rng.normal(size=20)
    for phi in rng.uniform(-3, 3, 10):
        np.testing.assert_allclose(q.output_feedback(obs, phi, g, 50.0, params),
                                   q.output_feedback(obs, phi + 2 * np.pi, g, 50.0, params), atol=1e-12)


def test_closed_loop_matrix_repeated_pole_exact():
    A = closed_loop_matrix(FeedbackGains.newton(1.0))
    assert match_multiset(exact_spectrum(A), [-1.0] * 16) <= 1e-9


def test_closed_loop_matrix_distinct_poles():
    A = closed_loop_matrix(gains_from_poles([-1, -2, -3, -4]))
    expected = [-1, -2, -3, -4] * 4
    assert match_multiset(np.linalg.eigvals(A), expected) <= 1e-9
    assert match_multiset(exact_spectrum(A), expected) <= 1e-9


def test_scalar_companion_charpoly_by_determinant():
    g = gains_from_poles([-0.5, -1.5, complex(-1, 2), complex(-1, -2)])
    A = closed_loop_matrix(g)
    C = A[::4, ::4]  # one channel of the block companion
    s = sympy.Symbol("s")
    M = s * sympy.eye(4) - sympy.Matrix(4, 4, [sympy.Rational(float(v)) for v in C.ravel()])
    coeffs = [float(c) for c in sympy.Poly(M.det(method="berkowitz"), s).all_coeffs()]
    np.testing.assert_allclose(coeffs, [1, g.gamma4, g.gamma3, g.gamma2, g.gamma1], atol=1e-12)
