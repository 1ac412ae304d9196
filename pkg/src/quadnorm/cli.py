"""Command-line front end.

    quadnorm run <file> [-o out] [--format csv|json] [--gnuplot]
    quadnorm sweep <file> --param kappa|N|pole --values 10,20,50 -o dir
    quadnorm compare <file> -o out
"""
import argparse
import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .control import FeedbackGains
from .errors import InvalidPoles, ScenarioError
from .observer import ObserverGains
from .scenario_file import parse_scenario, scenario_hash
from .sim import ControllerMode, compute_metrics, run_closed_loop
from .telemetry import fmt_float, summary_dict, write_csv, write_gnuplot, write_json, write_summary

EXIT_OK, EXIT_INPUT, EXIT_UNSETTLED, EXIT_ABORTED = 0, 1, 2, 3
SWEEP_PARAMS = ("kappa", "N", "pole")
COMPARE_AFTER = 0.5


def _err(msg):
    print(f"quadnorm: {msg}", file=sys.stderr)


def _load(path):
    try:
        return parse_scenario(path)
    except ScenarioError as exc:
        _err(f"{path}: {exc}")
    except OSError as exc:
        _err(f"cannot read {path}: {exc.strerror}")
    return None


def _exit_code(traj, metrics):
    if traj.aborted:
        return EXIT_ABORTED
    return EXIT_OK if metrics.settled else EXIT_UNSETTLED


def _summary_path(out):
    out = Path(out)
    return out.with_name(out.stem + ".summary.json")


def cmd_run(scenario_path, out_path, fmt="csv", seed=None, gnuplot=False):
    sc = _load(scenario_path)
    if sc is None:
        return EXIT_INPUT
    traj = run_closed_loop(sc, seed=seed)
    metrics = compute_metrics(traj)
    try:
        if fmt == "json":
            write_json(traj, out_path)
        else:
            write_csv(traj, out_path)
            if gnuplot:
                write_gnuplot(out_path, Path(out_path).with_suffix(".gp"))
        summary = summary_dict(metrics, traj)
        write_summary(summary, _summary_path(out_path))
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_INPUT
    print(json.dumps(summary, sort_keys=True))
    if traj.aborted:
        _err(f"aborted: {traj.message}")
    return _exit_code(traj, metrics)


def parse_values(text):
    vals = [s.strip() for s in text.split(",") if s.strip()]
    return [float(v) for v in vals]


def sweep_variant(sc, param, value):
    """Copy of ``sc`` with one sweep parameter set to ``value``."""
    if param == "kappa":
        og = ObserverGains(kappa=value, coeffs=sc.observer_gains.coeffs)
        # keep the observer resolved: dt <= 1/(50 kappa)
        return dataclasses.replace(sc, observer_gains=og, dt=min(sc.dt, 1.0 / (50.0 * value)))
    if param == "N":
        if not value > 0:
            raise ValueError(f"saturation level must be positive, got {value}")
        return dataclasses.replace(sc, sat_level=value)
    if param == "pole":
        return dataclasses.replace(sc, feedback_gains=FeedbackGains.newton(-value))
    raise ValueError(f"unknown sweep parameter {param!r}")


def _max_workers():
    env = os.environ.get("QUADNORM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            _err(f"ignoring invalid QUADNORM_THREADS={env!r}")
    return os.cpu_count() or 1


SWEEP_COLUMNS = ["value", "dt", "status", "settled", "settling_time", "final_error_pos",
                 "post_transient_observer_error", "peak_observer_error", "max_abs_U"]


def cmd_sweep(scenario_path, param, values, out_dir, seed=None):
    if param not in SWEEP_PARAMS:
        _err(f"--param must be one of {', '.join(SWEEP_PARAMS)}")
        return EXIT_INPUT
    if len(values) < 2:
        _err("a sweep needs at least two values")
        return EXIT_INPUT
    sc = _load(scenario_path)
    if sc is None:
        return EXIT_INPUT
    try:
        variants = [sweep_variant(sc, param, v) for v in values]
    except (ValueError, InvalidPoles) as exc:
        _err(str(exc))
        return EXIT_INPUT
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(i):
        traj = run_closed_loop(variants[i], seed=seed)
        write_csv(traj, out_dir / f"run_{i:03d}.csv")
        return traj, compute_metrics(traj)

    with ThreadPoolExecutor(max_workers=min(_max_workers(), len(variants))) as pool:
        results = list(pool.map(one, range(len(variants))))

    rows = []
    for v, sc_i, (traj, m) in zip(values, variants, results):
        rows.append([fmt_float(v), fmt_float(sc_i.dt), traj.status, int(m.settled),
                     fmt_float(m.settling_time_pos), fmt_float(m.final_error_pos),
                     fmt_float(m.post_transient_observer_error), fmt_float(m.peak_observer_error),
                     fmt_float(m.max_abs_U)])
    with open(out_dir / "summary.csv", "w", newline="", encoding="utf-8") as f:
        f.write(f"# quadnorm version={__version__} scenario_sha256={scenario_hash(sc)} param={param}\r\n")
        w = csv.writer(f)
        w.writerow(SWEEP_COLUMNS)
        w.writerows(rows)
    for traj, _ in results:
        if traj.aborted:
            _err(f"run aborted: {traj.message}")
    return EXIT_OK if all(m.settled for _, m in results) else EXIT_UNSETTLED


COMPARE_COLUMNS = ["t", "pos_err_state", "pos_err_output", "effort_state", "effort_output"]


def compare_runs(sc, seed=None):
    """Run ``sc`` under both laws; returns (state_traj, output_traj, gap)."""
    ts = run_closed_loop(dataclasses.replace(sc, controller_mode=ControllerMode.STATE), seed=seed)
    to = run_closed_loop(dataclasses.replace(sc, controller_mode=ControllerMode.OUTPUT), seed=seed)
    n = min(len(ts), len(to))
    diff = np.linalg.norm(ts.plant[:n, 0:3] - to.plant[:n, 0:3], axis=1)
    late = diff[ts.t[:n] > COMPARE_AFTER]
    gap = float(np.max(late)) if late.size else float("nan")
    return ts, to, gap


def cmd_compare(scenario_path, out_path, seed=None):
    sc = _load(scenario_path)
    if sc is None:
        return EXIT_INPUT
    ts, to, gap = compare_runs(sc, seed)
    n = min(len(ts), len(to))
    ms, mo = compute_metrics(ts), compute_metrics(to)
    try:
        with open(out_path, "w", newline="", encoding="utf-8") as f:
            f.write(f"# quadnorm version={__version__} scenario_sha256={scenario_hash(sc)} "
                    f"seed={ts.seed}\r\n")
            w = csv.writer(f)
            w.writerow(COMPARE_COLUMNS)
            es, eo = ts.pos_error, to.pos_error
            us, uo = np.sum(ts.U ** 2, axis=1), np.sum(to.U ** 2, axis=1)
            for k in range(n):
                w.writerow([fmt_float(v) for v in (ts.t[k], es[k], eo[k], us[k], uo[k])])
        summary = {
            "scenario_sha256": scenario_hash(sc),
            "seed": int(ts.seed),
            "sup_gap_pos_after_0_5s": gap,
            "status_state": ts.status,
            "status_output": to.status,
            "settled_state": ms.settled,
            "settled_output": mo.settled,
            "final_error_pos_state": ms.final_error_pos,
            "final_error_pos_output": mo.final_error_pos,
            "control_effort_state": ms.control_effort,
            "control_effort_output": mo.control_effort,
        }
        write_summary(summary, _summary_path(out_path))
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_INPUT
    print(json.dumps(summary, sort_keys=True))
    if ts.aborted or to.aborted:
        _err(f"aborted: {ts.message or to.message}")
        return EXIT_ABORTED
    return EXIT_OK if ms.settled and mo.settled else EXIT_UNSETTLED


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None, help="override the scenario's noise seed")

    ap = argparse.ArgumentParser(prog="quadnorm", description=__doc__.splitlines()[0] if __doc__ else None)
    ap.add_argument("--version", action="version", version=f"quadnorm {__version__}")
    ap.add_argument("--seed", dest="global_seed", type=_seed, default=None, help=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run one scenario")
    p.add_argument("scenario")
    p.add_argument("-o", "--out", default="telemetry.csv")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--gnuplot", action="store_true", help="also emit a gnuplot script next to the CSV")

    p = sub.add_parser("sweep", parents=[common], help="sweep kappa, N or a repeated pole")
    p.add_argument("scenario")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, help="comma-separated, e.g. 10,20,50 (use --values=-1,-2 for negatives)")
    p.add_argument("-o", "--out", default="sweep")

    p = sub.add_parser("compare", parents=[common], help="state vs output feedback on one scenario")
    p.add_argument("scenario")
    p.add_argument("-o", "--out", default="compare.csv")
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    seed = args.seed if args.seed is not None else args.global_seed
    if args.command == "run":
        return cmd_run(args.scenario, args.out, args.format, seed, args.gnuplot)
    if args.command == "sweep":
        try:
            values = parse_values(args.values)
        except ValueError:
            _err(f"--values: not a number list: {args.values!r}")
            return EXIT_INPUT
        return cmd_sweep(args.scenario, args.param, values, args.out, seed)
    return cmd_compare(args.scenario, args.out, seed)


if __name__ == "__main__":
    sys.exit(main())
