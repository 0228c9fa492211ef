"""Named invariant suites behind `rollctl check`.

Each suite measures residuals of properties the library is built around
(algebraic identities, conservation, dissipation, dual-form equivalence) and
compares them against fixed thresholds. The same measurements back the test
suite; here they are exposed for quick command-line verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry, liegroup
from .geometry import Gains
from .model import E3, RobotParams, RobotState
from .sim import (
    OrientationConstant,
    RestReference,
    ScenarioConfig,
    diagnostics,
    run_scenario,
)

__all__ = ["CheckResult", "run_suite", "SUITES", "random_rotation", "random_state"]


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.value <= self.threshold

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:42s} {self.value:12.4e} <= {self.threshold:.1e}"


def random_rotation(rng: np.random.Generator, max_angle: float = 3.0) -> np.ndarray:
    v = rng.normal(size=3)
    v = v / np.linalg.norm(v) * rng.uniform(0.0, max_angle)
    return liegroup.exp_so3(v)


def random_state(rng: np.random.Generator, scale: float = 2.0) -> RobotState:
    return RobotState.from_attitude(
        random_rotation(rng),
        omega=rng.normal(size=3) * scale,
        theta=rng.normal(size=3),
        theta_dot=rng.normal(size=3) * scale,
        x=np.array([rng.normal(), rng.normal(), 0.0]),
    )


# --------------------------------------------------------------------------
# suites


def suite_liegroup(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    res = []
    worst_hat = worst_roundtrip = worst_trace = worst_proj = 0.0
    for _ in range(100):
        v = rng.normal(size=3)
        w = rng.normal(size=3)
        worst_hat = max(
            worst_hat, float(np.abs(liegroup.hat(v) @ w - np.cross(v, w)).max())
        )
        worst_trace = max(
            worst_trace,
            abs(float(np.trace(liegroup.hat(v) @ liegroup.hat(w))) + 2.0 * float(v @ w)),
        )
        R = random_rotation(rng)
        worst_roundtrip = max(
            worst_roundtrip,
            float(np.abs(liegroup.exp_so3(liegroup.log_so3(R)) - R).max()),
        )
        E = rng.normal(size=(3, 3))
        E *= 1e-4 / np.linalg.norm(E)
        worst_proj = max(
            worst_proj, float(np.abs(liegroup.project_so3(R + E) - R).max()) / 2e-4
        )
    res.append(CheckResult("hat(v) w == v x w", worst_hat, 1e-14))
    res.append(CheckResult("exp(log(R)) == R", worst_roundtrip, 1e-9))
    res.append(CheckResult("trace(hat(x) hat(y)) == -2 x.y", worst_trace, 1e-12))
    res.append(CheckResult("projection within perturbation bound", worst_proj, 1.0))
    return res


def suite_gradients(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    lam = (2.0, 8.0, 1.0)
    h = 1e-5
    worst_grad = 0.0
    for _ in range(100):
        Rs, Rd = random_rotation(rng), random_rotation(rng)
        g = geometry.grad_trace_potential(Rs, Rd, lam)
        fd = np.array(
            [
                (
                    geometry.trace_potential(Rs @ liegroup.elem_rot(i + 1, h), Rd, lam)
                    - geometry.trace_potential(Rs @ liegroup.elem_rot(i + 1, -h), Rd, lam)
                )
                / (2.0 * h)
                for i in range(3)
            ]
        )
        worst_grad = max(
            worst_grad, float(np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g)))
        )
    hess = geometry.hessian_trace_potential(np.eye(3), np.eye(3), lam)
    expect = np.trace(np.diag(lam)) * np.eye(3) - np.diag(lam)
    hess_err = float(np.abs(hess - expect).max())
    hess_pd = -float(np.linalg.eigvalsh(hess)[0])
    return [
        CheckResult("gradient vs central differences (rel)", worst_grad, 1e-5),
        CheckResult("hessian at target vs closed form", hess_err, 1e-8),
        CheckResult("hessian negative-definiteness excess", hess_pd, -1e-9),
    ]


def _open_loop_config(p: RobotParams, state: RobotState, dt=1e-3, duration=10.0):
    return ScenarioConfig(
        params=p,
        gains=Gains(),
        reference=OrientationConstant(np.eye(3)),
        controller="open_loop",
        init=state,
        dt=dt,
        duration=duration,
        name="conservation_check",
    )


def suite_conservation(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    p = RobotParams.default()
    state = random_state(rng)
    rec = run_scenario(_open_loop_config(p, state))
    rep = diagnostics(rec)
    pi0 = float(np.linalg.norm(rec.pi[0]))
    return [
        CheckResult("pi drift / (1 + |pi(0)|), u = 0, 10 s", rep.pi_drift / (1.0 + pi0), 1e-6),
        CheckResult("| ||gamma|| - 1 |", rep.gamma_norm_dev, 1e-8),
        CheckResult("|gamma - R^T e3|", rep.gamma_frame_dev, 1e-8),
        CheckResult("x3 drift", rep.x3_drift, 1e-12),
    ]


def suite_dissipation(seed: int) -> list[CheckResult]:
    p = RobotParams.default()
    gains = Gains(Kp_diag=(2.0, 8.0, 1.0), Kv=0.5, kp=1.0, kd=0.12)
    Rd = (
        liegroup.elem_rot(1, np.pi / 9)
        @ liegroup.elem_rot(2, np.pi / 18)
        @ liegroup.elem_rot(3, np.pi / 3)
    )
    rec = run_scenario(
        ScenarioConfig(
            params=p,
            gains=gains,
            reference=OrientationConstant(Rd),
            controller="orientation_tracking",
            init=RobotState.from_attitude(np.eye(3), omega=(12.5, 7.0, 1.0)),
            dt=1e-3,
            duration=10.0,
            name="dissipation_orientation",
        )
    )
    w2 = np.sum(rec.omega**2, axis=1)
    resid_o = float(np.max(np.abs(rec.rho[2:-2]) / (1.0 + w2[2:-2])))
    mono = float(np.diff(rec.H).max())

    rec2 = run_scenario(
        ScenarioConfig(
            params=p,
            gains=gains,
            reference=RestReference((0.0, 0.0)),
            controller="position_tracking",
            init=RobotState.from_attitude(
                liegroup.elem_rot(1, 0.3), omega=(2.0, -1.0, 0.5), x=(1.0, -0.7, 0.0)
            ),
            dt=1e-3,
            duration=10.0,
            name="dissipation_position",
        )
    )
    w2b = np.sum(rec2.omega**2, axis=1)
    resid_p = float(np.max(np.abs(rec2.rho[2:-2]) / (1.0 + w2b[2:-2])))
    return [
        CheckResult("orientation |dH/dt + Kv w^2| (normalized)", resid_o, 1e-4),
        CheckResult("orientation H per-step increase", mono, 1e-9),
        CheckResult("position |dH/dt + kd w^2| (normalized)", resid_p, 1e-4),
    ]


def suite_dualform(seed: int) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    p = RobotParams.default()
    worst = 0.0
    table = _sinusoid_torque_table()
    for _ in range(3):
        state = random_state(rng)
        base = dict(
            params=p,
            gains=Gains(),
            reference=OrientationConstant(np.eye(3)),
            controller="open_loop",
            init=state,
            dt=1e-3,
            duration=5.0,
            torque_table=table,
        )
        rec_m = run_scenario(ScenarioConfig(name="dual_m", form="momentum", **base))
        rec_v = run_scenario(ScenarioConfig(name="dual_v", form="velocity", **base))
        worst = max(
            worst,
            float(np.abs(rec_m.R - rec_v.R).max()),
            float(np.abs(rec_m.omega - rec_v.omega).max()),
            float(np.abs(rec_m.x - rec_v.x).max()),
        )
    return [CheckResult("momentum vs velocity form, sup over 5 s", worst, 1e-6)]


def _sinusoid_torque_table(amplitude=0.02, duration=10.0, n=2001):
    t = np.linspace(0.0, duration, n)
    return np.column_stack(
        [
            t,
            amplitude * np.sin(1.3 * t),
            amplitude * np.cos(2.1 * t),
            amplitude * np.sin(0.7 * t + 0.5),
        ]
    )


SUITES = {
    "liegroup": suite_liegroup,
    "gradients": suite_gradients,
    "conservation": suite_conservation,
    "dissipation": suite_dissipation,
    "dualform": suite_dualform,
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    """Run one named suite, or all of them for name == 'all'."""
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(SUITES[key](seed))
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name](seed)
