import sys
from pathlib import Path

import numpy as np
import pytest

import quadnorm as q

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


@pytest.fixture
def params():
    return q.QuadParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


@pytest.fixture
def scenario_dir():
    return SCENARIOS


def random_extended_state(rng, tilt=0.4):
    """Generic state well inside the singularity guard."""
    s = np.empty(16)
    s[0:3] = rng.uniform(-2, 2, 3)
    s[3:6] = rng.uniform(-1, 1, 3)
    s[6:8] = rng.uniform(-tilt, tilt, 2)
    s[8] = rng.uniform(-np.pi, np.pi)
    s[9:12] = rng.uniform(-1, 1, 3)
    s[12:16] = rng.uniform(-1, 1, 4)
    return s


def random_params(rng):
    return q.QuadParams(
        m=rng.uniform(0.3, 3), ell=rng.uniform(0.1, 0.5),
        J_psi=rng.uniform(0.003, 0.05), J_theta=rng.uniform(0.003, 0.05), J_phi=rng.uniform(0.005, 0.08),
        C_prop=rng.uniform(0.005, 0.05),
        a_x=rng.uniform(0, 0.5), a_y=rng.uniform(0, 0.5), a_z=rng.uniform(0, 0.5),
        a_psi=rng.uniform(0, 1), a_theta=rng.uniform(0, 1), a_phi=rng.uniform(0, 1),
    )


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in getattr(rep, "nodeid", "") or rep.when != "call":
                continue
            props = dict(rep.user_properties)
            title = props.get("criterion", rep.nodeid.split("::")[-1])
            detail = props.get("detail", "")
            lines.append((title, "PASS" if outcome == "passed" else "FAIL", detail))
    if lines:
        terminalreporter.section("acceptance criteria")
        for title, verdict, detail in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {title}  {detail}")
