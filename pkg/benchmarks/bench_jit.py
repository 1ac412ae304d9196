"""Compare the compiled kernels against the pure-numpy fallback.

Each variant runs in its own interpreter because QUADNORM_DISABLE_JIT is read
at import time.  Usage: python benchmarks/bench_jit.py [--duration 2.0]
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
import quadnorm as q
sc = q.Scenario(setpoint=q.Setpoint(1.0, 0.0, 0.0, 0.5), duration=float(sys.argv[1]))
t0 = time.perf_counter()
q.run_closed_loop(sc)
first = time.perf_counter() - t0
t0 = time.perf_counter()
tr = q.run_closed_loop(sc)
steady = time.perf_counter() - t0
print(json.dumps({"jit": q.JIT_ENABLED, "first_s": first, "steady_s": steady,
                  "steps": sc.n_steps, "final_x": float(tr.plant[-1, 0])}))
"""


def run(disable, duration):
    env = dict(os.environ)
    env.pop("QUADNORM_DISABLE_JIT", None)
    if disable:
        env["QUADNORM_DISABLE_JIT"] = "1"
    out = subprocess.run([sys.executable, "-c", CHILD, str(duration)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=2.0, help="simulated seconds per run")
    args = ap.parse_args()
    jit, py = run(False, args.duration), run(True, args.duration)
    for name, r in (("numba", jit), ("numpy", py)):
        rate = r["steps"] / r["steady_s"]
        print(f"{name:6s} first {r['first_s']:8.3f} s  steady {r['steady_s']:8.3f} s  {rate:12.0f} steps/s")
    print(f"speedup {py['steady_s'] / jit['steady_s']:.1f}x, "
          f"|final x difference| = {abs(jit['final_x'] - py['final_x']):.3g}")


if __name__ == "__main__":
    main()
