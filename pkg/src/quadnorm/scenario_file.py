"""Plain-text scenario files.

Format: ``[section]`` headers, ``key = value`` lines, ``#`` comments, lists as
comma-separated values.  Unknown sections or keys are rejected.

Keys and defaults::

    [params]      m=1.0 ell=0.23 J_psi=0.0075 J_theta=0.0075 J_phi=0.013
                  C_prop=0.016 a_x=a_y=a_z=0.1 a_psi=a_theta=a_phi=0.3 g=9.81
    [setpoint]    x_star=0 y_star=0 z_star=0 phi_star=0
    [initial]     pos=0,0,0 vel=0,0,0 angles=0,0,0 (psi,theta,phi) rates=0,0,0
                  u1=0 u2=0 rho1=0 rho2=0
    [controller]  mode=output (state|output)
                  one of: poles=-1,-1,-1,-1 (complex as -1+1j)
                          preset=newton|butterworth with bandwidth=1.0
                          gains=gamma1,gamma2,gamma3,gamma4
                  sat_level=5*g  hold_control=false
    [observer]    kappa=20  coeffs=5,10,10,5,1 (a4,a3,a2,a1,a0)
    [sim]         dt=0.001 duration=20 clamp_forces=false seed=0
                  measurement_noise_std=0 (1 or 4 values, order z,phi,x,y)
                  friction_scale=1 (1 or 6 values) inertia_scale=1 (1 or 3 values)
                  singularity_threshold=0.05 tol_pos=0.01 tol_heading=0.01
"""
import hashlib
from dataclasses import fields

from .control import FeedbackGains, gains_from_poles
from .errors import InvalidPoles, EigenvalueConditionError, ParseError, UnknownKeyError, ValidationError
from .model import PlantState, QuadParams
from .observer import ObserverGains
from .sim import ControllerMode, Scenario
from .transform import ExtendedState, ExtensionState, Setpoint

SECTIONS = {
    "params": [f.name for f in fields(QuadParams)],
    "setpoint": ["x_star", "y_star", "z_star", "phi_star"],
    "initial": ["pos", "vel", "angles", "rates", "u1", "u2", "rho1", "rho2"],
    "controller": ["mode", "poles", "preset", "bandwidth", "gains", "sat_level", "hold_control"],
    "observer": ["kappa", "coeffs"],
    "sim": ["dt", "duration", "clamp_forces", "measurement_noise_std", "seed", "friction_scale",
            "inertia_scale", "singularity_threshold", "tol_pos", "tol_heading"],
}

_LIST_LEN = {
    ("initial", "pos"): (3,), ("initial", "vel"): (3,), ("initial", "angles"): (3,),
    ("initial", "rates"): (3,), ("controller", "poles"): (4,), ("controller", "gains"): (4,),
    ("observer", "coeffs"): (5,), ("sim", "measurement_noise_std"): (1, 4),
    ("sim", "friction_scale"): (1, 6), ("sim", "inertia_scale"): (1, 3),
}
_BOOL = {("controller", "hold_control"), ("sim", "clamp_forces")}
_TEXT = {("controller", "mode"), ("controller", "preset")}
_POSITIVE = {("params", k) for k in SECTIONS["params"] if not k.startswith("a_")} | {
    ("controller", "bandwidth"), ("controller", "sat_level"), ("observer", "kappa"),
    ("sim", "dt"), ("sim", "duration"), ("sim", "tol_pos"), ("sim", "tol_heading"),
}
_NONNEGATIVE = {("params", k) for k in SECTIONS["params"] if k.startswith("a_")} | {
    ("sim", "measurement_noise_std"), ("sim", "friction_scale"), ("sim", "singularity_threshold"),
}


def _num(text, key, line, allow_complex=False):
    try:
        return complex(text.replace(" ", "")) if allow_complex else float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", key, line) from None


def _parse_value(section, key, raw, line):
    sk = (section, key)
    if sk in _TEXT:
        return raw.strip().lower()
    if sk in _BOOL:
        v = raw.strip().lower()
        if v in ("true", "yes", "on", "1"):
            return True
        if v in ("false", "no", "off", "0"):
            return False
        raise ParseError(f"not a boolean: {raw!r}", key, line)
    if sk == ("sim", "seed"):
        try:
            seed = int(raw.strip())
        except ValueError:
            raise ParseError(f"not an integer: {raw!r}", key, line) from None
        if not 0 <= seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer", key, line)
        return seed
    if sk in _LIST_LEN:
        items = [s for s in raw.split(",")]
        if any(not s.strip() for s in items):
            raise ParseError(f"empty list element in {raw!r}", key, line)
        vals = [_num(s.strip(), key, line, allow_complex=(sk == ("controller", "poles"))) for s in items]
        if len(vals) not in _LIST_LEN[sk]:
            want = " or ".join(map(str, _LIST_LEN[sk]))
            raise ValidationError(f"expected {want} values, got {len(vals)}", key, line)
        return vals
    return _num(raw.strip(), key, line)


def _check_sign(section, key, value, line):
    vals = value if isinstance(value, list) else [value]
    vals = [v for v in vals if not isinstance(v, complex)]
    if (section, key) in _POSITIVE and any(not v > 0 for v in vals):
        raise ValidationError(f"{key} must be positive", key, line)
    if (section, key) in _NONNEGATIVE and any(not v >= 0 for v in vals):
        raise ValidationError(f"{key} must be non-negative", key, line)
    if (section, key) == ("sim", "inertia_scale") and any(not v > 0 for v in vals):
        raise ValidationError(f"{key} must be positive", key, line)


def parse_text(text):
    """Parse scenario text into {section: {key: (value, line)}}."""
    data = {}
    section = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(f"malformed section header {rawline.strip()!r}", line=lineno)
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise UnknownKeyError(f"unknown section [{section}]", section, lineno)
            data.setdefault(section, {})
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {rawline.strip()!r}", line=lineno)
        if section is None:
            raise ParseError("key outside of any section", line=lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in SECTIONS[section]:
            raise UnknownKeyError(f"unknown key in [{section}]", key, lineno)
        if key in data[section]:
            raise ParseError("duplicate key", key, lineno)
        if not raw:
            raise ParseError("missing value", key, lineno)
        value = _parse_value(section, key, raw, lineno)
        _check_sign(section, key, value, lineno)
        data[section][key] = (value, lineno)
    return data


def scenario_from_text(text):
    data = parse_text(text)

    def get(section, key, default=None):
        return data.get(section, {}).get(key, (default, None))

    def line_of(section, key):
        return get(section, key)[1]

    try:
        params = QuadParams(**{k: v for k, (v, _) in data.get("params", {}).items()})
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    setpoint = Setpoint(**{k: v for k, (v, _) in data.get("setpoint", {}).items()})
    ini = data.get("initial", {})
    plant = PlantState(*(ini.get(k, ([0.0] * 3, None))[0] for k in ("pos", "vel", "angles", "rates")))
    ext = ExtensionState(*(ini.get(k, (0.0, None))[0] for k in ("u1", "u2", "rho1", "rho2")))

    mode, mode_line = get("controller", "mode", "output")
    if mode not in ("state", "output"):
        raise ValidationError(f"mode must be 'state' or 'output', got {mode!r}", "mode", mode_line)
    ctl = data.get("controller", {})
    chosen = [k for k in ("poles", "preset", "gains") if k in ctl]
    if len(chosen) > 1:
        raise ValidationError(f"give only one of poles/preset/gains, got {chosen}",
                              chosen[1], ctl[chosen[1]][1])
    if "bandwidth" in ctl and "preset" not in ctl:
        raise ValidationError("bandwidth requires preset", "bandwidth", ctl["bandwidth"][1])
    try:
        if "gains" in ctl:
            gains = FeedbackGains(*ctl["gains"][0])
        elif "preset" in ctl:
            preset, pline = ctl["preset"]
            bw = get("controller", "bandwidth", 1.0)[0]
            if preset == "newton":
                gains = FeedbackGains.newton(bw)
            elif preset == "butterworth":
                gains = FeedbackGains.butterworth(bw)
            else:
                raise ValidationError(f"unknown preset {preset!r}", "preset", pline)
        else:
            gains = gains_from_poles(get("controller", "poles", [-1.0] * 4)[0])
    except InvalidPoles as exc:
        key = chosen[0] if chosen else "poles"
        raise ValidationError(str(exc), key, line_of("controller", key)) from None

    try:
        obs = ObserverGains(kappa=get("observer", "kappa", 20.0)[0],
                            coeffs=tuple(get("observer", "coeffs", [5.0, 10.0, 10.0, 5.0, 1.0])[0]))
    except (EigenvalueConditionError, ValueError) as exc:
        raise ValidationError(str(exc), "coeffs", line_of("observer", "coeffs")) from None

    dt, dt_line = get("sim", "dt", 1e-3)
    duration, dur_line = get("sim", "duration", 20.0)
    if not duration > dt:
        raise ValidationError("duration must exceed dt", "duration", dur_line or dt_line)
    thr, thr_line = get("sim", "singularity_threshold", 0.05)
    if not thr < 1:
        raise ValidationError("singularity_threshold must be below 1", "singularity_threshold", thr_line)
    try:
        return Scenario(
            params=params,
            setpoint=setpoint,
            initial=ExtendedState(plant, ext),
            controller_mode=ControllerMode(mode),
            feedback_gains=gains,
            observer_gains=obs,
            sat_level=get("controller", "sat_level", None)[0],
            dt=dt,
            duration=duration,
            clamp_forces=get("sim", "clamp_forces", False)[0],
            hold_control=get("controller", "hold_control", False)[0],
            measurement_noise_std=get("sim", "measurement_noise_std", [0.0])[0],
            seed=get("sim", "seed", 0)[0],
            friction_scale=get("sim", "friction_scale", [1.0])[0],
            inertia_scale=get("sim", "inertia_scale", [1.0])[0],
            singularity_threshold=thr,
            tol_pos=get("sim", "tol_pos", 1e-2)[0],
            tol_heading=get("sim", "tol_heading", 1e-2)[0],
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def parse_scenario(path):
    with open(path, encoding="utf-8") as f:
        return scenario_from_text(f.read())


def _fmt(v):
    return repr(float(v))


def _fmt_list(vs):
    return ", ".join(_fmt(v) for v in vs)


def serialize_scenario(sc: Scenario):
    """Exact text form; parsing it back yields an equal Scenario."""
    p = sc.params
    ini = sc.initial
    lines = ["[params]"]
    lines += [f"{f.name} = {_fmt(getattr(p, f.name))}" for f in fields(QuadParams)]
    lines += ["", "[setpoint]"]
    lines += [f"{k} = {_fmt(getattr(sc.setpoint, k))}" for k in SECTIONS["setpoint"]]
    lines += ["", "[initial]",
              f"pos = {_fmt_list(ini.plant.pos)}",
              f"vel = {_fmt_list(ini.plant.vel)}",
              f"angles = {_fmt_list(ini.plant.angles)}",
              f"rates = {_fmt_list(ini.plant.rates)}"]
    lines += [f"{k} = {_fmt(getattr(ini.ext, k))}" for k in ("u1", "u2", "rho1", "rho2")]
    lines += ["", "[controller]",
              f"mode = {sc.controller_mode.value}",
              f"gains = {_fmt_list(sc.feedback_gains.as_array())}",
              f"sat_level = {_fmt(sc.sat_level)}",
              f"hold_control = {str(sc.hold_control).lower()}"]
    lines += ["", "[observer]",
              f"kappa = {_fmt(sc.observer_gains.kappa)}",
              f"coeffs = {_fmt_list(sc.observer_gains.coeffs)}"]
    lines += ["", "[sim]",
              f"dt = {_fmt(sc.dt)}",
              f"duration = {_fmt(sc.duration)}",
              f"clamp_forces = {str(sc.clamp_forces).lower()}",
              f"measurement_noise_std = {_fmt_list(sc.measurement_noise_std)}",
              f"seed = {int(sc.seed)}",
              f"friction_scale = {_fmt_list(sc.friction_scale)}",
              f"inertia_scale = {_fmt_list(sc.inertia_scale)}",
              f"singularity_threshold = {_fmt(sc.singularity_threshold)}",
              f"tol_pos = {_fmt(sc.tol_pos)}",
              f"tol_heading = {_fmt(sc.tol_heading)}"]
    return "\n".join(lines) + "\n"


def scenario_hash(sc: Scenario):
    return hashlib.sha256(serialize_scenario(sc).encode("utf-8")).hexdigest()
