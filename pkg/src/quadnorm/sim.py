"""Closed-loop scenarios: fixed-step RK4 integration, logging and metrics."""
import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .control import FeedbackGains, default_sat_level
from .errors import DegenerateB4Error, NonFiniteStateError, SingularityError
from .model import QuadParams
from .observer import ObserverGains
from .transform import DEFAULT_GUARD, ExtendedState, Setpoint


class ControllerMode(str, enum.Enum):
    STATE = "state"
    OUTPUT = "output"


def rk4_step(f, state, t, dt):
    """One classic Runge-Kutta step of x' = f(t, x)."""
    x = np.asarray(state, dtype=float)
    k1 = f(t, x)
    k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _tuple(v, n, name):
    a = np.broadcast_to(np.asarray(v, dtype=float), (n,))
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return tuple(float(x) for x in a)


@dataclass
class Scenario:
    params: QuadParams = field(default_factory=QuadParams)
    setpoint: Setpoint = field(default_factory=Setpoint)
    initial: ExtendedState = field(default_factory=ExtendedState)
    controller_mode: ControllerMode = ControllerMode.OUTPUT
    feedback_gains: FeedbackGains = field(default_factory=FeedbackGains.newton)
    observer_gains: ObserverGains = field(default_factory=ObserverGains)
    sat_level: float = None
    dt: float = 1e-3
    duration: float = 20.0
    clamp_forces: bool = False
    hold_control: bool = False
    measurement_noise_std: tuple = (0.0, 0.0, 0.0, 0.0)
    seed: int = 0
    friction_scale: tuple = (1.0,) * 6
    inertia_scale: tuple = (1.0,) * 3
    singularity_threshold: float = DEFAULT_GUARD
    tol_pos: float = 1e-2
    tol_heading: float = 1e-2

    def __post_init__(self):
        self.controller_mode = ControllerMode(self.controller_mode)
        if self.sat_level is None:
            self.sat_level = default_sat_level(self.params)
        self.measurement_noise_std = _tuple(self.measurement_noise_std, 4, "measurement_noise_std")
        self.friction_scale = _tuple(self.friction_scale, 6, "friction_scale")
        self.inertia_scale = _tuple(self.inertia_scale, 3, "inertia_scale")
        self.validate()

    def validate(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration > self.dt:
            raise ValueError("duration must exceed dt")
        if not self.sat_level > 0:
            raise ValueError("sat_level must be positive")
        if any(s < 0 for s in self.measurement_noise_std):
            raise ValueError("measurement_noise_std must be non-negative")
        if any(s < 0 for s in self.friction_scale) or any(s <= 0 for s in self.inertia_scale):
            raise ValueError("perturbation factors must be positive")
        if not 0 <= self.singularity_threshold < 1:
            raise ValueError("singularity_threshold must lie in [0, 1)")
        if self.tol_pos <= 0 or self.tol_heading <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))

    @property
    def plant_params(self):
        return self.params.perturbed(self.friction_scale, self.inertia_scale)


@dataclass
class Trajectory:
    t: np.ndarray
    plant: np.ndarray
    ext: np.ndarray
    U: np.ndarray
    F: np.ndarray
    obs: np.ndarray  # None in state-feedback mode
    zeta: np.ndarray
    neg_thrust: np.ndarray
    sing_margin: np.ndarray
    scenario: Scenario
    seed: int
    status: str = "ok"
    message: str = ""

    @property
    def aborted(self):
        return self.status != "ok"

    def __len__(self):
        return len(self.t)

    @property
    def pos_error(self):
        sp = self.scenario.setpoint
        return np.linalg.norm(self.plant[:, 0:3] - [sp.x_star, sp.y_star, sp.z_star], axis=1)

    @property
    def heading_error(self):
        return np.abs(self.plant[:, 8] - self.scenario.setpoint.phi_star)

    @property
    def est_err(self):
        """|zeta - zeta_hat| per step, or None without an observer."""
        if self.obs is None:
            return None
        return np.linalg.norm(self.zeta - self.obs[:, :16], axis=1)

    def raise_for_status(self):
        exc = {"singular": SingularityError, "nonfinite": NonFiniteStateError,
               "degenerate_b4": DegenerateB4Error}.get(self.status)
        if exc is not None:
            err = exc(self.message)
            err.trajectory = self
            raise err


_STATUS = {K.STATUS_OK: "ok", K.STATUS_SINGULAR: "singular",
           K.STATUS_NONFINITE: "nonfinite", K.STATUS_DEGENERATE_B4: "degenerate_b4"}


def measurement_noise(sc: Scenario, seed=None):
    seed = sc.seed if seed is None else seed
    n = sc.n_steps + 1
    std = np.asarray(sc.measurement_noise_std)
    if not np.any(std > 0):
        return np.zeros((n, 4))
    rng = np.random.default_rng(int(seed))
    return rng.standard_normal((n, 4)) * std


def run_closed_loop(sc: Scenario, seed=None, strict=False):
    """Integrate plant, extension and (in output mode) observer.

    An abort (singularity guard, non-finite state, singular b4) returns the
    valid prefix with ``status``/``message`` set; ``strict=True`` raises the
    matching error instead, carrying the partial trajectory.
    """
    seed = sc.seed if seed is None else int(seed)
    mode = K.MODE_OUTPUT if sc.controller_mode is ControllerMode.OUTPUT else K.MODE_STATE
    og = sc.observer_gains
    if mode == K.MODE_OUTPUT and sc.dt > 1.0 / (50.0 * og.kappa) * (1 + 1e-9):
        warnings.warn(f"dt = {sc.dt} exceeds 1/(50 kappa) = {1 / (50 * og.kappa):.3g}; "
                      "the observer may be under-resolved", stacklevel=2)

    nominal = sc.params
    plant = sc.plant_params
    cg = np.array([nominal.J_psi / plant.J_psi, nominal.J_theta / plant.J_theta,
                   nominal.J_phi / plant.J_phi])
    X0 = np.zeros(K.NX)
    X0[:16] = np.asarray(sc.initial, dtype=float)
    Xs, Us, Fs, Zs, neg, margin, n_done, status = K.simulate(
        X0, sc.n_steps, float(sc.dt), mode, np.asarray(sc.setpoint, dtype=float),
        plant.as_array(), nominal.as_array(), cg, sc.feedback_gains.as_array(),
        float(sc.sat_level), og.as_array(), float(og.kappa),
        bool(sc.clamp_forces), bool(sc.hold_control), measurement_noise(sc, seed),
        float(sc.singularity_threshold),
    )
    n = n_done
    message = ""
    if status != K.STATUS_OK:
        t_abort = n * sc.dt
        message = {
            K.STATUS_SINGULAR: f"singularity guard cos(theta)cos(psi) <= {sc.singularity_threshold} "
                               f"tripped at t = {t_abort:.6g} s",
            K.STATUS_NONFINITE: f"non-finite state at t = {t_abort:.6g} s",
            K.STATUS_DEGENERATE_B4: f"b4 numerically singular at t = {t_abort:.6g} s",
        }[status]
    traj = Trajectory(
        t=np.arange(n) * sc.dt,
        plant=Xs[:n, 0:12].copy(),
        ext=Xs[:n, 12:16].copy(),
        U=Us[:n].copy(),
        F=Fs[:n].copy(),
        obs=Xs[:n, 16:36].copy() if mode == K.MODE_OUTPUT else None,
        zeta=Zs[:n].copy(),
        neg_thrust=neg[:n].copy(),
        sing_margin=margin[:n].copy(),
        scenario=sc,
        seed=seed,
        status=_STATUS[status],
        message=message,
    )
    if strict:
        traj.raise_for_status()
    return traj


@dataclass
class Metrics:
    settling_time_pos: float
    settling_time_heading: float
    settled_pos: bool
    settled_heading: bool
    overshoot: dict
    final_error_pos: float
    final_error_heading: float
    peak_observer_error: float
    post_transient_observer_error: float
    control_effort: float
    max_abs_U: float
    aborted: bool

    @property
    def settled(self):
        return self.settled_pos and self.settled_heading and not self.aborted

    def as_dict(self):
        d = dict(self.__dict__)
        d["overshoot"] = dict(self.overshoot)
        d["settled"] = self.settled
        return d


def settling_time(t, err, tol):
    """First time after which err stays below tol; nan if it never does."""
    bad = np.flatnonzero(~(np.asarray(err) < tol))
    if bad.size == 0:
        return float(t[0])
    if bad[-1] == len(err) - 1:
        return float("nan")
    return float(t[bad[-1] + 1])


def overshoot_percent(err):
    """Excursion past the target, relative to the initial offset, in percent.

    ``err`` is the signed signal minus its target.
    """
    err = np.asarray(err, dtype=float)
    e0 = err[0]
    if abs(e0) < 1e-12:
        return 0.0
    return float(max(0.0, np.max(-err * np.sign(e0))) / abs(e0) * 100.0)


def compute_metrics(traj: Trajectory, tol_pos=None, tol_heading=None, transient=1.0):
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    sc = traj.scenario
    tol_pos = sc.tol_pos if tol_pos is None else tol_pos
    tol_heading = sc.tol_heading if tol_heading is None else tol_heading
    sp = sc.setpoint
    pe, he = traj.pos_error, traj.heading_error
    ts_p = settling_time(traj.t, pe, tol_pos)
    ts_h = settling_time(traj.t, he, tol_heading)
    signed = {
        "x": traj.plant[:, 0] - sp.x_star,
        "y": traj.plant[:, 1] - sp.y_star,
        "z": traj.plant[:, 2] - sp.z_star,
        "phi": traj.plant[:, 8] - sp.phi_star,
    }
    unorm2 = np.sum(traj.U ** 2, axis=1)
    effort = float(np.trapezoid(unorm2, traj.t)) if len(traj) > 1 else 0.0
    ee = traj.est_err
    if ee is None:
        peak = post = float("nan")
    else:
        peak = float(np.max(ee))
        late = ee[traj.t > transient]
        post = float(np.mean(late)) if late.size else float("nan")
    return Metrics(
        settling_time_pos=ts_p,
        settling_time_heading=ts_h,
        settled_pos=not np.isnan(ts_p),
        settled_heading=not np.isnan(ts_h),
        overshoot={k: overshoot_percent(v) for k, v in signed.items()},
        final_error_pos=float(pe[-1]),
        final_error_heading=float(he[-1]),
        peak_observer_error=peak,
        post_transient_observer_error=post,
        control_effort=effort,
        max_abs_U=float(np.max(np.abs(traj.U))),
        aborted=traj.aborted,
    )
