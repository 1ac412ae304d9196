"""Extended high-gain observer driven by the measured block zeta1."""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import EigenvalueConditionError
from .model import QuadParams, _flat


def _all_roots_real(coeffs, rtol=1e-10):
    """Hermite's criterion: every root is real iff the Hankel matrix of the
    Newton power sums is positive semidefinite.  Unlike np.roots this is
    insensitive to root multiplicity."""
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    e = c[1:] / c[0]
    p = np.zeros(2 * n - 1)
    p[0] = n
    # Newton's identities for the monic polynomial x^n + e1 x^(n-1) + ...
    for k in range(1, 2 * n - 1):
        acc = -k * e[k - 1] if k <= n else 0.0
        for i in range(1, min(k - 1, n) + 1):
            acc -= e[i - 1] * p[k - i]
        p[k] = acc
    H = np.array([[p[i + j] for j in range(n)] for i in range(n)])
    ev = np.linalg.eigvalsh(H)
    return ev.min() >= -rtol * max(1.0, np.abs(ev).max())


def check_observer_coeffs(coeffs):
    """coeffs = (a4, a3, a2, a1, a0) of s^5 + a4 s^4 + ... + a0."""
    a = np.asarray(coeffs, dtype=float)
    if a.shape != (5,):
        raise EigenvalueConditionError(f"need 5 observer coefficients, got {a.shape}")
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise EigenvalueConditionError(f"observer coefficients must be positive: {a}")
    # positive coefficients already exclude non-negative real roots
    if not _all_roots_real(np.concatenate([[1.0], a])):
        raise EigenvalueConditionError(f"s^5 + {a} has complex roots")
    return a


@dataclass(frozen=True)
class ObserverGains:
    kappa: float = 20.0
    coeffs: tuple = (5.0, 10.0, 10.0, 5.0, 1.0)

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        a = check_observer_coeffs(self.coeffs)
        object.__setattr__(self, "coeffs", tuple(float(v) for v in a))

    @classmethod
    def from_roots(cls, roots, kappa=20.0):
        return cls(kappa, tuple(np.poly(roots).real[1:]))

    def as_array(self):
        return np.array(self.coeffs, dtype=float)


@dataclass
class ObserverState:
    zeta_hat: np.ndarray = field(default_factory=lambda: np.zeros(16))
    sigma: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        self.zeta_hat = _flat(self.zeta_hat, 16).copy()
        self.sigma = _flat(self.sigma, 4).copy()

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(a[:16], a[16:20])

    def __array__(self, dtype=None, copy=None):
        a = np.concatenate([self.zeta_hat, self.sigma])
        return a if dtype is None else a.astype(dtype)


def observer_deriv(obs, measured_zeta1, phi_measured, U, gains: ObserverGains, params: QuadParams):
    o = _flat(np.asarray(obs), 20)
    return K.observer_deriv(o[:16].copy(), o[16:].copy(), _flat(measured_zeta1, 4),
                            float(phi_measured), _flat(U, 4), float(gains.kappa),
                            gains.as_array(), params.g)


def a_matrix(gains):
    """20x20 error matrix of the normalized observer.

    ``gains`` is an ObserverGains or a raw (a4, a3, a2, a1, a0) sequence; raw
    sequences are validated here as well.
    """
    a = gains.as_array() if isinstance(gains, ObserverGains) else check_observer_coeffs(gains)
    I = np.eye(4)
    A = np.zeros((20, 20))
    for k in range(5):
        A[4 * k:4 * k + 4, 0:4] = -a[k] * I
        if k < 4:
            A[4 * k:4 * k + 4, 4 * k + 4:4 * k + 8] = I
    return A
