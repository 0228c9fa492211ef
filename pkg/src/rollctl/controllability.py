"""Control vector fields, numerical Lie brackets and rank certificates.

Rotations are charted locally by the exponential at the evaluation point, so
every field becomes a smooth field on R^n and brackets are computed by
differentiating the flow pullback with central differences plus one Richardson
extrapolation level. Ranks are chart-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import Gains, grad_trace_potential
from .liegroup import exp_so3, inverse_dexp
from .model import E3, RobotParams, RobotState, lock_inertia_solve

__all__ = [
    "mechanical_connection",
    "input_fields",
    "fiber_fields",
    "lie_bracket_numeric",
    "local_rank",
    "local_rank_report",
    "fiber_rank",
    "fiber_rank_report",
    "closed_loop_field",
    "input_field",
    "fiber_field",
    "bracket_top_block_closed_form",
    "RankReport",
]

_RANK_RTOL = 1e-8  # relative singular-value threshold for numerical rank


def mechanical_connection(p: RobotParams, gamma: np.ndarray) -> np.ndarray:
    """Map A(gamma) from rotor rates to shell rate at zero total momentum.

    A = (I^s + J - m_T r^2 hat(gamma)^2)^{-1} J; with the shell momentum zero,
    omega = -A(gamma) theta_dot.
    """
    locked = (p.lock_iso + p.J_a) * np.eye(3) - p.lock_rank1 * np.outer(gamma, gamma)
    return np.linalg.solve(locked, p.J_a * np.eye(3))


def input_fields(p: RobotParams, s: RobotState) -> list[np.ndarray]:
    """Values of the three torque input fields on the (attitude, rate) space.

    Each is (0_3, -M(gamma)^{-1} e_i) in the exponential chart at s.
    """
    vals = []
    for i in range(3):
        v = np.zeros(6)
        v[3:] = -lock_inertia_solve(p, s.gamma, _EYE3[i])
        vals.append(v)
    return vals


def fiber_fields(
    p: RobotParams, gamma: np.ndarray, R: np.ndarray | None = None
) -> list[np.ndarray]:
    """Values of the zero-momentum control fields on attitude x rotors x plane.

    Component blocks: shell rate -A(gamma) e_i, rotor rate e_i, and the
    inertial contact-point velocity (horizontal by construction). If R is not
    given, the minimal rotation with R^T e3 = gamma is used for the last
    block.
    """
    if R is None:
        R = _rotation_with_vertical(gamma)
    A = mechanical_connection(p, gamma)
    vals = []
    for i in range(3):
        v = np.zeros(8)
        omega = -A[:, i]
        v[0:3] = omega
        v[3:6] = _EYE3[i]
        v[6:8] = (R @ (p.r * np.cross(omega, gamma)))[:2]
        vals.append(v)
    return vals


# --------------------------------------------------------------------------
# charted vector fields


def closed_loop_field(
    p: RobotParams,
    s: RobotState,
    R_d: np.ndarray | None = None,
    gains: Gains | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Drift field of the attitude-stabilized closed loop, charted at s.

    Chart coordinates z = (xi, omega): the attitude is s.R @ exp_so3(xi). The
    rotor rate is frozen at s.theta_dot (it is not part of this state space).
    """
    R0 = s.R
    Rd = np.eye(3) if R_d is None else R_d
    g = Gains() if gains is None else gains
    thd = s.theta_dot

    def field(z: np.ndarray) -> np.ndarray:
        xi, omega = z[:3], z[3:]
        R = R0 @ exp_so3(xi)
        gamma = R.T @ E3
        u = grad_trace_potential(R, Rd, g.Kp_diag) + g.Kv * omega
        rhs = np.cross(p.i_s * omega + p.J_a * thd, omega) - u
        out = np.empty(6)
        out[:3] = inverse_dexp(xi, omega)
        out[3:] = lock_inertia_solve(p, gamma, rhs)
        return out

    return field


def input_field(
    p: RobotParams,
    s: RobotState,
    i: int,
    actuation: np.ndarray | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Charted torque input field g_i = (0, -M^{-1} e_i) at s.

    `actuation` replaces M^{-1} by an arbitrary matrix (used as a negative
    control of the rank test: a rank-deficient actuation must drop the rank).
    """
    R0 = s.R

    def field(z: np.ndarray) -> np.ndarray:
        xi = z[:3]
        out = np.zeros(6)
        if actuation is None:
            gamma = (R0 @ exp_so3(xi)).T @ E3
            out[3:] = -lock_inertia_solve(p, gamma, _EYE3[i])
        else:
            out[3:] = -actuation[:, i]
        return out

    return field


def fiber_field(p: RobotParams, R0: np.ndarray, i: int) -> Callable[[np.ndarray], np.ndarray]:
    """Charted zero-momentum field on (attitude, rotor angles, plane position)."""

    def field(z: np.ndarray) -> np.ndarray:
        xi = z[:3]
        R = R0 @ exp_so3(xi)
        gamma = R.T @ E3
        A = mechanical_connection(p, gamma)
        omega = -A[:, i]
        out = np.empty(8)
        out[:3] = inverse_dexp(xi, omega)
        out[3:6] = _EYE3[i]
        out[6:8] = (R @ (p.r * np.cross(omega, gamma)))[:2]
        return out

    return field


# --------------------------------------------------------------------------
# numerical brackets


def lie_bracket_numeric(
    X: Callable[[np.ndarray], np.ndarray],
    Y: Callable[[np.ndarray], np.ndarray],
    dim: int,
    h: float = 1e-4,
    fd_delta: float = 1e-6,
) -> np.ndarray:
    """Lie bracket [X, Y] at the chart origin via flow pullback.

    Central differences of t -> (D Phi_t^X)^{-1} Y(Phi_t^X(0)) with one
    Richardson level: O(h^4) for smooth fields.
    """
    if h < 1e-8:
        raise ValueError(f"bracket step underflow: h = {h:.3e}")

    def flow(z0: np.ndarray, t: float) -> np.ndarray:
        k1 = X(z0)
        k2 = X(z0 + 0.5 * t * k1)
        k3 = X(z0 + 0.5 * t * k2)
        k4 = X(z0 + t * k3)
        return z0 + (t / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def pullback(t: float) -> np.ndarray:
        J = np.empty((dim, dim))
        dz = np.zeros(dim)
        for j in range(dim):
            dz[j] = fd_delta
            J[:, j] = (flow(dz, t) - flow(-dz, t)) / (2.0 * fd_delta)
            dz[j] = 0.0
        return np.linalg.solve(J, Y(flow(np.zeros(dim), t)))

    def slope(hh: float) -> np.ndarray:
        return (pullback(hh) - pullback(-hh)) / (2.0 * hh)

    return (4.0 * slope(0.5 * h) - slope(h)) / 3.0


def bracket_top_block_closed_form(p: RobotParams, s: RobotState, i: int) -> np.ndarray:
    """Attitude block of [g_i, F_cl] at s: -M(gamma)^{-1} e_i in the chart.

    (Equivalently R_s hat(-M^{-1} e_i) on the manifold; the sign follows the
    g_i = (0, -M^{-1} e_i) convention.)
    """
    return -lock_inertia_solve(p, s.gamma, _EYE3[i])


# --------------------------------------------------------------------------
# rank certificates


@dataclass
class RankReport:
    rank: int
    singular_values: np.ndarray
    closed_form_residual: float | None = None
    pair_ranks: dict | None = None


def _numerical_rank(vectors: Sequence[np.ndarray]) -> tuple[int, np.ndarray]:
    Mx = np.array(vectors).T
    svals = np.linalg.svd(Mx, compute_uv=False)
    if svals[0] == 0.0:
        return 0, svals
    return int(np.sum(svals > _RANK_RTOL * svals[0])), svals


def local_rank_report(
    p: RobotParams,
    s: RobotState,
    R_d: np.ndarray | None = None,
    gains: Gains | None = None,
    h: float = 1e-4,
    actuation: np.ndarray | None = None,
) -> RankReport:
    """Rank of {g_i} U {[F_cl, g_i]} on the six-dimensional (attitude, rate) space."""
    F = closed_loop_field(p, s, R_d=R_d, gains=gains)
    vectors = []
    residual = 0.0
    for i in range(3):
        gi = input_field(p, s, i, actuation=actuation)
        vectors.append(gi(np.zeros(6)))
        b = lie_bracket_numeric(gi, F, 6, h=h)
        if actuation is None:
            residual = max(
                residual,
                float(np.abs(b[:3] - bracket_top_block_closed_form(p, s, i)).max()),
            )
        vectors.append(-b)  # [F, g_i] = -[g_i, F]; the span is unaffected
    rank, svals = _numerical_rank(vectors)
    return RankReport(rank=rank, singular_values=svals, closed_form_residual=residual)


def local_rank(p: RobotParams, s: RobotState, **kwargs) -> int:
    """Accessibility rank at s; 6 means the bracket family spans the space."""
    return local_rank_report(p, s, **kwargs).rank


def fiber_rank_report(
    p: RobotParams,
    gamma: np.ndarray,
    R: np.ndarray | None = None,
    h: float = 1e-4,
) -> RankReport:
    """Rank of the zero-momentum fields plus pairwise brackets on the fiber.

    Fiber directions are the attitude block and the plane block (rotor angles
    are shape variables). All three pairwise brackets are included: at the
    symmetric vertical configuration the (1,2)/(1,3) pair alone degenerates to
    rank 4, and the third pair restores the full rank; per-pair ranks are
    reported.
    """
    R0 = _rotation_with_vertical(gamma) if R is None else R
    fields = [fiber_field(p, R0, i) for i in range(3)]
    base = [f(np.zeros(8)) for f in fields]
    brackets = {
        (i, j): lie_bracket_numeric(fields[i], fields[j], 8, h=h)
        for i, j in ((0, 1), (0, 2), (1, 2))
    }

    def fiber_part(v: np.ndarray) -> np.ndarray:
        return np.concatenate([v[0:3], v[6:8]])

    # rank for each two-bracket selection, plus the all-pairs rank
    pair_ranks = {}
    selections = {
        "(1,2)+(1,3)": [(0, 1), (0, 2)],
        "(1,2)+(2,3)": [(0, 1), (1, 2)],
        "(1,3)+(2,3)": [(0, 2), (1, 2)],
    }
    for name, pairs in selections.items():
        vecs = [fiber_part(v) for v in base] + [fiber_part(brackets[q]) for q in pairs]
        pair_ranks[name], _ = _numerical_rank(vecs)
    all_vecs = [fiber_part(v) for v in base] + [fiber_part(b) for b in brackets.values()]
    rank, svals = _numerical_rank(all_vecs)
    return RankReport(rank=rank, singular_values=svals, pair_ranks=pair_ranks)


def fiber_rank(p: RobotParams, gamma: np.ndarray, **kwargs) -> int:
    """Reachable-fiber rank at gamma; 5 means attitude and plane are spanned."""
    return fiber_rank_report(p, gamma, **kwargs).rank


def _rotation_with_vertical(gamma: np.ndarray) -> np.ndarray:
    """Minimal rotation R with R^T e3 = gamma (gamma away from -e3)."""
    g = np.asarray(gamma, dtype=float)
    n = np.linalg.norm(g)
    if abs(n - 1.0) > 2e-6:
        raise ValueError(f"gamma not on sphere: ||gamma|| = {n:.9f}")
    g = g / n
    c = float(g @ E3)
    if c < -1.0 + 1e-12:
        return exp_so3(np.pi * np.array([1.0, 0.0, 0.0]))
    axis = np.cross(g, E3)  # rotating gamma about this axis moves it onto e3
    s = np.linalg.norm(axis)
    if s < 1e-16:
        return np.eye(3)
    return exp_so3(axis / s * np.arctan2(s, c))

_EYE3 = np.eye(3)
