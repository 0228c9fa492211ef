"""Feedback torque laws for the rotor-driven rolling sphere.

All laws share one sign convention, fixed by the shell dynamics
M(gamma) omega' = (I^s omega + J theta_dot) x omega - u and the requirement
that the associated energy H decays as dH/dt = -gain * ||e_omega||^2 along the
closed loop (exactly so for set-point references; the residual is recorded,
not assumed, for moving references):

    orientation:      u = gradV + Kv e_omega - f_ff
    contact position: u = kp g_pos + kd e_omega - f_ff
    reduced attitude: u = kp g_pos + k_gamma (gamma x e3) + kd e_omega - f_ff

With u entering the shell equation negatively, the gradient terms perform
descent on their potentials and e_omega damping is dissipative; flipping any
of these signs is measurably destabilizing (the position term then drives the
sphere away from its target).
"""

from __future__ import annotations

import numpy as np

from .geometry import (
    DesiredFrame,
    Gains,
    _feedforward_raw,
    grad_trace_potential,
    position_gradient_term,
)
from .model import E3, RobotParams, RobotState, lock_inertia_apply, lock_inertia_solve

__all__ = [
    "orientation_tracking_law",
    "position_tracking_law",
    "reduced_attitude_law",
    "torque_transform",
    "torque_transform_inverse",
]


def orientation_tracking_law(
    p: RobotParams, s: RobotState, d: DesiredFrame, g: Gains
) -> np.ndarray:
    """Attitude-tracking torque: gradient + damping - feedforward.

    For a reference at rest this reduces to gradV + Kv omega (the feedforward
    vanishes identically).
    """
    w = d.R_d @ d.omega_d
    w_dot = d.R_d @ d.omega_d_dot
    return _orientation_torque(p, s.R, s.omega, s.gamma, d.R_d, w, w_dot, g.Kp_diag, g.Kv)


def _orientation_torque(p, R, omega, gamma, R_d, w, w_dot, Kp_diag, Kv):
    e = omega - R.T @ w
    u = grad_trace_potential(R, R_d, Kp_diag) + Kv * e
    if _any_nonzero(w) or _any_nonzero(w_dot):
        u = u - _feedforward_raw(p, R, omega, gamma, w, w_dot)
    return u


def position_tracking_law(
    p: RobotParams, s: RobotState, d: DesiredFrame, g: Gains
) -> np.ndarray:
    """Contact-position tracking torque.

    Only the inertial desired spin R_d omega_d enters: the velocity error is
    e = omega - R_s^T (R_d omega_d) whatever R_d is. kp = 1 makes the energy
    identity dH/dt = -kd ||e||^2 exact for references at rest.
    """
    w = d.R_d @ d.omega_d
    w_dot = d.R_d @ d.omega_d_dot
    return _position_torque(p, s.R, s.omega, s.gamma, s.x, d.x_d, w, w_dot, g.kp, g.kd)


def _position_torque(p, R, omega, gamma, x, x_d, w, w_dot, kp, kd):
    e = omega - R.T @ w
    u = kp * position_gradient_term(R, x, x_d, p.r) + kd * e
    if _any_nonzero(w) or _any_nonzero(w_dot):
        u = u - _feedforward_raw(p, R, omega, gamma, w, w_dot)
    return u


def _any_nonzero(v) -> bool:
    return v[0] != 0.0 or v[1] != 0.0 or v[2] != 0.0


def reduced_attitude_law(p: RobotParams, s: RobotState, g: Gains) -> np.ndarray:
    """Spin-up about the vertical while stabilizing the contact point at 0.

    Target set: x = 0, omega = alpha * gamma (inertial spin alpha * e3). The
    k_gamma term is the gradient of the alignment potential
    k_gamma (1 - gamma . e3); with k_gamma > 0 the invariant set collapses to
    gamma = e3 so the shell axis also aligns with the vertical (with
    k_gamma = 0 the final tilt is an undetermined constant). alpha = 0 and
    k_gamma = 0 recover plain position stabilization at the origin.
    """
    return _reduced_attitude_torque(
        p, s.R, s.omega, s.gamma, s.x, g.kp, g.kd, g.alpha, g.k_gamma
    )


def _reduced_attitude_torque(p, R, omega, gamma, x, kp, kd, alpha, k_gamma):
    e = omega - alpha * gamma
    u = kp * position_gradient_term(R, x, _ZERO3, p.r) + kd * e
    if k_gamma != 0.0:
        u = u + k_gamma * np.array([gamma[1], -gamma[0], 0.0])  # gamma x e3
    if alpha != 0.0:
        u = u - _feedforward_raw(p, R, omega, gamma, alpha * E3, _ZERO3)
    return u


_ZERO3 = np.zeros(3)


# --------------------------------------------------------------------------
# rotor-torque transform


def _delta_matrix(p: RobotParams, gamma: np.ndarray) -> np.ndarray:
    # Delta = J - J (I^s + J - m_T r^2 hat(gamma)^2)^{-1} J, with J = J_a I
    locked = (p.lock_iso + p.J_a) * np.eye(3) - p.lock_rank1 * np.outer(gamma, gamma)
    return p.J_a * np.eye(3) - p.J_a * p.J_a * np.linalg.inv(locked)


def torque_transform(p: RobotParams, gamma: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Equivalent control input v = Delta u (Delta symmetric positive definite)."""
    return _checked_delta(p, gamma) @ u


def torque_transform_inverse(p: RobotParams, gamma: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Recover the rotor torque u from the transformed input v."""
    return np.linalg.solve(_checked_delta(p, gamma), v)


def _checked_delta(p, gamma):
    n = float(gamma @ gamma)
    if abs(n - 1.0) > 2e-6:
        raise ValueError(f"gamma not on sphere: ||gamma|| = {np.sqrt(n):.9f}")
    D = _delta_matrix(p, gamma)
    evals = np.linalg.eigvalsh(0.5 * (D + D.T))
    if evals[0] <= 0.0 or evals[-1] / evals[0] > 1e12:
        raise ValueError("torque transform is ill-conditioned")
    return D
