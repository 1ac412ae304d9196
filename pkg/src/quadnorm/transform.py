"""Deviation coordinates, dynamic extension and the normal-form map.

The tracked outputs are (z, phi, x, y), always in that block order.  After
double-integrating u1 and u2 every output has relative degree four, and

    zeta1 = outputs - setpoint,  zeta2..zeta4 = their first three derivatives,
    d/dt zeta4 = q4 + b4 @ U,    U = (v1, v2, u3, u4).
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import DegenerateB4Error, SingularityError
from .model import PlantState, QuadParams, _flat

DEFAULT_GUARD = 0.05
_UNIT_GAIN = np.ones(3)


@dataclass(frozen=True)
class Setpoint:
    x_star: float = 0.0
    y_star: float = 0.0
    z_star: float = 0.0
    phi_star: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x_star, self.y_star, self.z_star, self.phi_star], dtype=dtype or float)


@dataclass
class ExtensionState:
    u1: float = 0.0
    u2: float = 0.0
    rho1: float = 0.0
    rho2: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.array([self.u1, self.u2, self.rho1, self.rho2], dtype=dtype or float)


@dataclass
class ExtendedState:
    plant: PlantState = field(default_factory=PlantState)
    ext: ExtensionState = field(default_factory=ExtensionState)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(PlantState.from_array(a[:12]), ExtensionState(*map(float, a[12:16])))

    @classmethod
    def at_setpoint(cls, sp: Setpoint):
        return cls(PlantState.at_rest((sp.x_star, sp.y_star, sp.z_star), sp.phi_star))

    def __array__(self, dtype=None, copy=None):
        a = np.concatenate([self.plant.to_array(), np.asarray(self.ext)])
        return a if dtype is None else a.astype(dtype)


@dataclass
class DeviationCoords:
    xi1: np.ndarray
    xi2: np.ndarray
    xi5: np.ndarray
    xi6: np.ndarray


@dataclass
class NormalCoords:
    zeta1: np.ndarray
    zeta2: np.ndarray
    zeta3: np.ndarray
    zeta4: np.ndarray

    @classmethod
    def from_flat(cls, z):
        z = np.asarray(z, dtype=float)
        return cls(z[0:4].copy(), z[4:8].copy(), z[8:12].copy(), z[12:16].copy())

    @property
    def flat(self):
        return np.concatenate([self.zeta1, self.zeta2, self.zeta3, self.zeta4])

    def __array__(self, dtype=None, copy=None):
        return self.flat if dtype is None else self.flat.astype(dtype)


@dataclass
class Q4B4:
    q4: np.ndarray
    b4: np.ndarray


@dataclass
class DeviationDynamicsTerms:
    q1: np.ndarray
    b1: np.ndarray
    beta: float
    q2: np.ndarray
    b21: np.ndarray
    b22: np.ndarray


def _split(state):
    a = _flat(state, 16)
    return a[:12].copy(), a[12:].copy()


def singularity_margin(angles, guard=DEFAULT_GUARD):
    psi, theta = float(angles[0]), float(angles[1])
    return np.cos(theta) * np.cos(psi) - guard


def check_guard(angles, guard=DEFAULT_GUARD):
    margin = singularity_margin(angles, guard)
    if not margin > 0.0:
        raise SingularityError(
            f"singularity guard violated: cos(theta)cos(psi) = {margin + guard:.6g} <= {guard}")


def deviation(state, sp: Setpoint):
    s, _ = _split(state)
    t = K.thrust_dir(s[6], s[7], s[8])
    tdot = K.thrust_jac(s[6], s[7], s[8]) @ s[9:12]
    spa = np.asarray(sp)
    xi1 = np.array([s[2] - spa[2], s[8] - spa[3], s[0] - spa[0], s[1] - spa[1]])
    xi2 = np.array([s[5], s[11], s[3], s[4]])
    return DeviationCoords(xi1, xi2, t[:2].copy(), tdot[:2].copy())


def extension_deriv(ext, v):
    e = _flat(ext, 4)
    v = _flat(v, 2)
    return np.array([e[2], e[3], v[0], v[1]])


def zeta(state, sp: Setpoint, params: QuadParams, guard=DEFAULT_GUARD):
    s, e = _split(state)
    check_guard(s[6:9], guard)
    return NormalCoords.from_flat(K.zeta(s, e, np.asarray(sp), params.as_array(), _UNIT_GAIN))


def zeta4_dot(state, U, params: QuadParams):
    """Closed-form d/dt zeta4 for the control U = (v1, v2, u3, u4)."""
    s, e = _split(state)
    return K.zeta4_dot(s, e, _flat(U, 4), params.as_array(), _UNIT_GAIN)


def deviation_terms(state, sp: Setpoint, params: QuadParams, guard=DEFAULT_GUARD):
    s, e = _split(state)
    check_guard(s[6:9], guard)
    P = params
    psi, theta, phi = s[6:9]
    w = s[9:12]
    t = K.thrust_dir(psi, theta, phi)
    J = K.thrust_jac(psi, theta, phi)
    q1 = np.array([-P.a_z * s[5] + P.g * (t[2] - 1.0), -P.a_phi * s[11]])
    b1 = np.diag([t[2], 1.0])
    drift = np.array([-P.a_psi * w[0], -P.a_theta * w[1], -P.a_phi * w[2]])
    q2 = (K.thrust_hess_quad(psi, theta, phi, w) + J @ drift)[:2]
    return DeviationDynamicsTerms(
        q1=q1, b1=b1, beta=e[0] + P.g,
        q2=q2, b21=J[:2, 2].copy(), b22=J[:2, :2].copy(),
    )


def q4_b4(state, params: QuadParams, guard=DEFAULT_GUARD):
    s, e = _split(state)
    check_guard(s[6:9], guard)
    q4, b4 = K.q4_b4(s, e, params.as_array(), _UNIT_GAIN)
    if abs(np.linalg.det(b4)) < K.DET_B4_MIN:
        raise DegenerateB4Error(f"|det b4| = {abs(np.linalg.det(b4)):.3g}")
    return Q4B4(q4, b4)


def b4_at_origin(phi, params: QuadParams):
    """b4 at zeta = 0 for heading phi.

    The (z, phi) rows are the identity on (v1, v2); the (x, y) rows act on
    (u3, u4) through g [[sin phi, cos phi], [-cos phi, sin phi]], so the
    determinant is g**2 for every heading.
    """
    return K.b4_origin(float(phi), params.g)
