import time
from pathlib import Path

import numpy as np
import pytest

from rollctl.config import load_config
from rollctl.sim import run_scenario

PRESET_DIR = Path(__file__).resolve().parents[1] / "presets"

PRESETS = [
    "open_loop",
    "orientation_stab",
    "orientation_track",
    "reduced_attitude",
    "circle",
    "line",
    "position_stab",
]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def preset_records():
    """Run every bundled preset once at its configured duration.

    Records are reused across tests (run_scenario is deterministic, so reuse
    is exact); wall-clock time per scenario is kept for the runtime criteria.
    """
    out = {}
    for name in PRESETS:
        cfg = load_config(PRESET_DIR / f"{name}.cfg")
        t0 = time.perf_counter()
        rec = run_scenario(cfg)
        wall = time.perf_counter() - t0
        out[name] = (cfg, rec, wall)
    return out
