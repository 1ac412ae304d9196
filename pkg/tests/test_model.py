import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import quadnorm as q
from conftest import random_params
from oracles import plant_rhs, thrust_axis

angle = st.floats(-np.pi, np.pi, allow_nan=False)


def test_thrust_direction_identity():
    np.testing.assert_array_equal(q.thrust_direction((0, 0, 0)), [0, 0, 1])


def test_thrust_direction_pure_pitch():
    np.testing.assert_allclose(q.thrust_direction((0, np.pi / 2, 0)), [1, 0, 0], atol=1e-15)


def test_thrust_direction_against_rotation_oracle():
    t = q.thrust_direction((0.3, 0.2, 0.7))
    np.testing.assert_allclose(t, thrust_axis(0.3, 0.2, 0.7), atol=1e-15)
    assert abs(np.linalg.norm(t) - 1) <= 1e-14


@given(angle, angle, angle)
def test_thrust_direction_unit_norm(psi, theta, phi):
    assert abs(np.linalg.norm(q.thrust_direction((psi, theta, phi))) - 1) <= 1e-14


def test_hover_forces_values():
    np.testing.assert_allclose(q.hover_forces(q.QuadParams(m=1.0)), [2.4525] * 4, rtol=1e-15)
    # 0.5 * 9.81 / 4
    np.testing.assert_allclose(q.hover_forces(q.QuadParams(m=0.5)), [1.22625] * 4, rtol=1e-15)


def test_hover_is_equilibrium(params):
    d = q.plant_deriv(q.PlantState(), q.hover_forces(params), params)
    assert np.max(np.abs(d)) == 0.0


def test_free_fall(params):
    d = q.plant_deriv(q.PlantState(), np.zeros(4), params)
    expected = np.zeros(12)
    expected[5] = -params.g
    np.testing.assert_array_equal(d, expected)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_hover_closure_random_params(seed):
    p = random_params(np.random.default_rng(seed))
    d = q.plant_deriv(q.PlantState.at_rest((1.0, -2.0, 3.0), phi=0.7), q.hover_forces(p), p)
    assert np.max(np.abs(d)) <= 1e-13


def test_plant_deriv_matches_matrix_oracle(rng):
    for _ in range(200):
        p = random_params(rng)
        s = rng.normal(size=12)
        F = rng.uniform(-2, 8, 4)
        np.testing.assert_allclose(q.plant_deriv(s, F, p), plant_rhs(s, F, p), rtol=0, atol=1e-12)


def test_friction_opposes_velocity(params):
    s = q.PlantState(vel=(0.7, -1.3, 0.4))
    d = q.plant_deriv(s, q.hover_forces(params), params)
    assert np.all(d[3:6] * s.vel < 0)


def test_linear_in_forces(rng, params):
    s = rng.normal(size=12)
    F1, F2 = rng.normal(size=4), rng.normal(size=4)
    a, b = 1.7, -0.4
    d0 = q.plant_deriv(s, np.zeros(4), params)
    lhs = q.plant_deriv(s, a * F1 + b * F2, params) - d0
    rhs = a * (q.plant_deriv(s, F1, params) - d0) + b * (q.plant_deriv(s, F2, params) - d0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_nan_propagates(params):
    s = np.zeros(12)
    s[7] = np.nan
    assert np.isnan(q.plant_deriv(s, q.hover_forces(params), params)).any()


@pytest.mark.parametrize("field,value", [("m", 0.0), ("J_phi", -1.0), ("a_x", -0.1), ("g", np.inf)])
def test_invalid_params(field, value):
    with pytest.raises(ValueError, match=field):
        q.QuadParams(**{field: value})


def test_perturbed_scales_only_friction_and_inertia(params):
    p = params.perturbed(friction=1.5, inertia=(2.0, 1.0, 0.5))
    assert p.a_x == pytest.approx(1.5 * params.a_x)
    assert p.J_psi == pytest.approx(2 * params.J_psi)
    assert p.J_phi == pytest.approx(0.5 * params.J_phi)
    assert (p.m, p.ell, p.C_prop, p.g) == (params.m, params.ell, params.C_prop, params.g)
