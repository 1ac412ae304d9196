"""Telemetry and summary writers (CSV, JSON, gnuplot)."""
import csv
import json
import math

import numpy as np

from . import __version__
from .scenario_file import scenario_hash
from .sim import Metrics, Trajectory

COLUMNS = (
    ["t", "x", "y", "z", "vx", "vy", "vz", "psi", "theta", "phi", "psi_dot", "theta_dot", "phi_dot",
     "u1", "u2", "rho1", "rho2", "U_v1", "U_v2", "U_u3", "U_u4", "F1", "F2", "F3", "F4"]
    + [f"zeta_hat_{i}" for i in range(1, 17)]
    + [f"sigma_{i}" for i in range(1, 5)]
    + ["est_err_norm", "neg_thrust_flag", "sing_margin"]
)


def fmt_float(v):
    """17 significant digits, '.' decimal separator."""
    return format(float(v), ".17g")


def telemetry_table(traj: Trajectory):
    """Numeric table matching COLUMNS; NaN marks blank cells."""
    n = len(traj)
    obs = traj.obs if traj.obs is not None else np.full((n, 20), np.nan)
    err = traj.est_err if traj.obs is not None else np.full(n, np.nan)
    return np.column_stack([traj.t, traj.plant, traj.ext, traj.U, traj.F, obs, err,
                            traj.neg_thrust.astype(float), traj.sing_margin])


def provenance(traj: Trajectory):
    return {
        "version": __version__,
        "scenario_sha256": scenario_hash(traj.scenario),
        "seed": int(traj.seed),
        "mode": traj.scenario.controller_mode.value,
        "status": traj.status,
    }


def _cell(col, v):
    if math.isnan(v):
        return ""
    if col == "neg_thrust_flag":
        return str(int(v))
    return fmt_float(v)


def write_csv(traj: Trajectory, path):
    table = telemetry_table(traj)
    prov = provenance(traj)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("# quadnorm " + " ".join(f"{k}={v}" for k, v in prov.items()) + "\r\n")
        w = csv.writer(f)
        w.writerow(COLUMNS)
        for row in table:
            w.writerow([_cell(c, v) for c, v in zip(COLUMNS, row)])


def _json_value(v):
    return None if isinstance(v, float) and math.isnan(v) else v


def write_json(traj: Trajectory, path):
    table = telemetry_table(traj)
    doc = dict(provenance(traj))
    doc["columns"] = COLUMNS
    doc["rows"] = [[_json_value(float(v)) for v in row] for row in table]
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)
        f.write("\n")


def summary_dict(metrics: Metrics, traj: Trajectory):
    d = provenance(traj)
    m = metrics.as_dict()
    for axis, v in m.pop("overshoot").items():
        m[f"overshoot_{axis}"] = v
    d.update(m)
    d["message"] = traj.message
    return {k: _json_value(v) for k, v in d.items()}


def write_summary(summary, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def write_gnuplot(csv_path, gp_path):
    cols = {c: i + 1 for i, c in enumerate(COLUMNS)}
    with open(gp_path, "w", encoding="utf-8") as f:
        f.write("set datafile separator ','\nset datafile commentschars '#'\n"
                "set key autotitle columnhead\nset xlabel 't [s]'\nset grid\n")
        f.write(f"plot '{csv_path}' using {cols['t']}:{cols['x']} with lines, \\\n"
                f"     '' using {cols['t']}:{cols['y']} with lines, \\\n"
                f"     '' using {cols['t']}:{cols['z']} with lines, \\\n"
                f"     '' using {cols['t']}:{cols['phi']} with lines\n"
                "pause -1\n")
