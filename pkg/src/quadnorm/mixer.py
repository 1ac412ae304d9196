"""Rotor force allocation.

``allocate`` maps the normalized channels (u1, u2, u3, u4) to rotor forces so
that total thrust is m (u1 + g) and the three angular accelerations are
driven one-to-one by u3 (psi), u4 (theta) and u2 (phi), with unit gain.
"""
import numpy as np

from . import _kernels as K
from .model import QuadParams, _flat

# rows map channel columns to rotors; S @ S.T == 4 I
SIGN_MATRIX = np.array([
    [1, 1, -1, -1],
    [1, -1, 1, -1],
    [1, 1, 1, 1],
    [1, -1, -1, 1],
], dtype=float)


def allocation_matrix(params: QuadParams):
    """Linear part of ``allocate``: F = A @ (u1 + g, u2, u3, u4)."""
    D = np.diag([params.m, params.J_phi / params.C_prop,
                 params.J_psi / params.ell, params.J_theta / params.ell])
    return 0.25 * SIGN_MATRIX @ D


def allocate(u, params: QuadParams):
    return K.allocate(_flat(u, 4), params.as_array())


def channels_from_forces(forces, params: QuadParams):
    return K.channels_from_forces(_flat(forces, 4), params.as_array())
