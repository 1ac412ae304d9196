"""Gain design and the two control laws acting on the normal form."""
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import DegenerateB4Error, InvalidPoles
from .model import QuadParams, _flat
from .transform import NormalCoords, Q4B4


def default_sat_level(params: QuadParams):
    return 5.0 * params.g


@dataclass(frozen=True)
class FeedbackGains:
    """Coefficients of s^4 + gamma4 s^3 + gamma3 s^2 + gamma2 s + gamma1."""

    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float

    def __post_init__(self):
        g1, g2, g3, g4 = self.as_array()
        if not np.all(np.isfinite([g1, g2, g3, g4])) or min(g1, g2, g3, g4) <= 0:
            raise InvalidPoles(f"gains must be finite and positive, got {self.as_array()}")
        # Routh-Hurwitz conditions for a monic quartic
        if not (g4 * g3 > g2 and g4 * g3 * g2 > g2 * g2 + g4 * g4 * g1):
            raise InvalidPoles(f"characteristic polynomial is not Hurwitz for gains {self.as_array()}")

    def as_array(self):
        return np.array([self.gamma1, self.gamma2, self.gamma3, self.gamma4], dtype=float)

    @classmethod
    def from_poles(cls, poles):
        return gains_from_poles(poles)

    @classmethod
    def newton(cls, bandwidth=1.0):
        """All four poles at -bandwidth."""
        return gains_from_poles([-bandwidth] * 4)

    @classmethod
    def butterworth(cls, cutoff=1.0):
        k = np.arange(1, 5)
        poles = cutoff * np.exp(1j * np.pi * (2 * k + 3) / 8)
        return gains_from_poles(poles)


def gains_from_poles(poles):
    p = np.asarray(poles, dtype=complex).reshape(-1)
    if p.shape != (4,):
        raise InvalidPoles(f"need exactly 4 poles, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise InvalidPoles("poles must be finite")
    if np.any(p.real >= 0):
        raise InvalidPoles(f"poles must have negative real part: {p}")
    scale = max(1.0, float(np.max(np.abs(p))))
    unmatched = list(np.conj(p))
    for pole in p:
        d = [abs(pole - c) for c in unmatched]
        i = int(np.argmin(d))
        if d[i] > 1e-9 * scale:
            raise InvalidPoles(f"pole set is not closed under conjugation: {p}")
        unmatched.pop(i)
    c = np.poly(p).real
    return FeedbackGains(gamma1=c[4], gamma2=c[3], gamma3=c[2], gamma4=c[1])


def smooth_sat(x, N):
    """Componentwise N tanh(x / N)."""
    if not N > 0:
        raise ValueError(f"saturation level must be positive, got {N}")
    return K.smooth_sat(np.asarray(x, dtype=float), float(N))


def state_feedback(z, qb: Q4B4, gains: FeedbackGains):
    """Exact linearizing law U = b4^-1 (-q4 - sum_k gamma_k zeta_k)."""
    zf = _flat(np.asarray(z), 16)
    U, status = K.state_feedback(zf, _flat(qb.q4, 4), np.ascontiguousarray(qb.b4, dtype=float),
                                 gains.as_array())
    if status != K.STATUS_OK:
        raise DegenerateB4Error(f"|det b4| = {abs(np.linalg.det(qb.b4)):.3g}")
    return U


def output_feedback(obs, phi_measured, gains: FeedbackGains, N, params: QuadParams):
    """Saturated law using only observer states and the measured heading."""
    if not N > 0:
        raise ValueError(f"saturation level must be positive, got {N}")
    o = _flat(np.asarray(obs), 20)
    return K.output_feedback(o[:16].copy(), o[16:].copy(), float(phi_measured),
                             gains.as_array(), float(N), params.g)


def closed_loop_matrix(gains: FeedbackGains):
    I = np.eye(4)
    A = np.zeros((16, 16))
    for k in range(3):
        A[4 * k:4 * k + 4, 4 * k + 4:4 * k + 8] = I
    for k, gk in enumerate(gains.as_array()):
        A[12:16, 4 * k:4 * k + 4] = -gk * I
    return A
