"""Nonlinear rigid-body quadcopter plant.

Angles are kept as (psi, theta, phi).  psi and theta are actuated through
the arm length ``ell`` and tilt the thrust; phi is driven by the rotor
reaction torque ``C_prop`` and acts as the heading.
"""
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import _kernels as K

FRICTION_FIELDS = ("a_x", "a_y", "a_z", "a_psi", "a_theta", "a_phi")
INERTIA_FIELDS = ("J_psi", "J_theta", "J_phi")


@dataclass(frozen=True)
class QuadParams:
    m: float = 1.0
    ell: float = 0.23
    J_psi: float = 0.0075
    J_theta: float = 0.0075
    J_phi: float = 0.013
    C_prop: float = 0.016
    a_x: float = 0.1
    a_y: float = 0.1
    a_z: float = 0.1
    a_psi: float = 0.3
    a_theta: float = 0.3
    a_phi: float = 0.3
    g: float = 9.81

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
            if f.name in FRICTION_FIELDS:
                if v < 0:
                    raise ValueError(f"{f.name} must be >= 0, got {v}")
            elif v <= 0:
                raise ValueError(f"{f.name} must be > 0, got {v}")

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)

    def perturbed(self, friction=1.0, inertia=1.0):
        """Copy with friction (6 factors) and inertias (3 factors) scaled."""
        fr = np.broadcast_to(np.asarray(friction, dtype=float), (6,))
        ji = np.broadcast_to(np.asarray(inertia, dtype=float), (3,))
        changes = {k: getattr(self, k) * s for k, s in zip(FRICTION_FIELDS, fr)}
        changes.update({k: getattr(self, k) * s for k, s in zip(INERTIA_FIELDS, ji)})
        return replace(self, **changes)


def _vec3(v):
    return np.asarray(v, dtype=float).reshape(3).copy()


@dataclass(eq=False)
class PlantState:
    pos: np.ndarray = field(default_factory=lambda: np.zeros(3))
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angles: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rates: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.pos = _vec3(self.pos)
        self.vel = _vec3(self.vel)
        self.angles = _vec3(self.angles)
        self.rates = _vec3(self.rates)

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a[0:3], a[3:6], a[6:9], a[9:12])

    @classmethod
    def at_rest(cls, pos=(0.0, 0.0, 0.0), phi=0.0):
        return cls(pos=pos, angles=(0.0, 0.0, phi))

    def to_array(self):
        return np.concatenate([self.pos, self.vel, self.angles, self.rates])

    def __eq__(self, other):
        if not isinstance(other, PlantState):
            return NotImplemented
        return np.array_equal(self.to_array(), other.to_array())

    def __array__(self, dtype=None, copy=None):
        a = self.to_array()
        return a if dtype is None else a.astype(dtype)


def _flat(a, n):
    a = np.ascontiguousarray(np.asarray(a, dtype=float).reshape(-1))
    if a.shape != (n,):
        raise ValueError(f"expected {n} values, got {a.shape[0]}")
    return a


def thrust_direction(angles):
    """Unit thrust axis in the world frame for angles (psi, theta, phi)."""
    psi, theta, phi = (float(v) for v in angles)
    return K.thrust_dir(psi, theta, phi)


def plant_deriv(state, forces, params: QuadParams):
    """Time derivative of the 12 plant states under rotor forces ``forces``.

    NaN inputs propagate; guarding is up to the caller.
    """
    return K.plant_deriv(_flat(state, 12), _flat(forces, 4), params.as_array())


def hover_forces(params: QuadParams):
    return np.full(4, params.m * params.g / 4.0)


def negative_thrust(forces):
    return bool(np.any(np.asarray(forces) < 0.0))
