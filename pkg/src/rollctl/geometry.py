"""Error functions, gradients, transported velocity errors and energies.

The attitude error is measured by a weighted trace potential with three
distinct positive weights (a Morse function on the rotation group); velocity
errors compare body rates through the right transport map, and the locked
inertia acts as the Riemannian metric of the reduced system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import RobotParams, RobotState, lock_inertia_apply

__all__ = [
    "Gains",
    "DesiredFrame",
    "trace_potential",
    "grad_trace_potential",
    "velocity_error",
    "connection_product",
    "feedforward",
    "tracking_energy",
    "error_norm",
    "position_potential",
    "position_gradient_term",
    "hessian_trace_potential",
]


@dataclass(frozen=True)
class Gains:
    """Controller gains.

    Kp_diag: attitude potential weights, positive and pairwise distinct.
    Kv: attitude velocity-damping gain. kp, kd: position proportional /
    damping gains (kp = 1 keeps the dissipation identity exact). alpha:
    desired vertical spin rate for the reduced-attitude law. k_gamma:
    vertical-alignment gain of the reduced-attitude law (0 disables the
    alignment potential).
    """

    Kp_diag: tuple[float, float, float] = (2.0, 8.0, 1.0)
    Kv: float = 0.5
    kp: float = 1.0
    kd: float = 0.12
    alpha: float = 0.0
    k_gamma: float = 0.0

    def __post_init__(self):
        l1, l2, l3 = self.Kp_diag
        if min(l1, l2, l3) <= 0.0:
            raise ValueError("Kp weights must be strictly positive")
        if l1 == l2 or l2 == l3 or l1 == l3:
            raise ValueError("Kp weights must be pairwise distinct")
        if self.Kv <= 0.0 or self.kp <= 0.0 or self.kd <= 0.0:
            raise ValueError("Kv, kp and kd must be strictly positive")
        if self.k_gamma < 0.0:
            raise ValueError("k_gamma must be nonnegative")


@dataclass
class DesiredFrame:
    """Reference attitude/velocity/position sample at one time instant."""

    R_d: np.ndarray
    omega_d: np.ndarray
    omega_d_dot: np.ndarray
    x_d: np.ndarray
    x_d_dot: np.ndarray

    @classmethod
    def at_rest(cls, R_d: np.ndarray | None = None) -> "DesiredFrame":
        return cls(
            R_d=np.eye(3) if R_d is None else np.asarray(R_d, dtype=float),
            omega_d=np.zeros(3),
            omega_d_dot=np.zeros(3),
            x_d=np.zeros(3),
            x_d_dot=np.zeros(3),
        )

    @property
    def spin_inertial(self) -> np.ndarray:
        """Desired angular velocity in the inertial frame, R_d omega_d."""
        return self.R_d @ self.omega_d

    @property
    def spin_rate_inertial(self) -> np.ndarray:
        """Time derivative of R_d omega_d (equals R_d omega_d_dot)."""
        return self.R_d @ self.omega_d_dot


# --------------------------------------------------------------------------
# attitude potential


def trace_potential(R_s: np.ndarray, R_d: np.ndarray, Kp_diag) -> float:
    """Weighted trace error sum(lam_i * (1 - (R_d^T R_s)_ii)); zero iff R_s = R_d."""
    Re = R_d.T @ R_s
    lam = Kp_diag
    return float(
        lam[0] * (1.0 - Re[0, 0]) + lam[1] * (1.0 - Re[1, 1]) + lam[2] * (1.0 - Re[2, 2])
    )


def grad_trace_potential(R_s: np.ndarray, R_d: np.ndarray, Kp_diag) -> np.ndarray:
    """Differential of the trace potential with respect to right perturbations.

    Computed in two algebraically equivalent forms, the weighted-axes sum
    sum_i lam_i (R_s^T R_d e_i) x e_i and the antisymmetric-part form
    vee(A - A^T) with A = Kp R_d^T R_s, which are cross-checked on every call.
    The sign is fixed by d/deps V(R_s exp_so3(eps*hat(eta)))|_0 = <grad, eta>.
    """
    l0, l1, l2 = float(Kp_diag[0]), float(Kp_diag[1]), float(Kp_diag[2])
    # sum form: sum_i lam_i (b_i x e_i) with b_i the columns of B = R_s^T R_d;
    # b x e1 = (0, b2, -b1), b x e2 = (-b2, 0, b0), b x e3 = (b1, -b0, 0)
    B = R_s.T @ R_d
    s0 = l1 * (-B[2, 1]) + l2 * B[1, 2]
    s1 = l0 * B[2, 0] + l2 * (-B[0, 2])
    s2 = l0 * (-B[1, 0]) + l1 * B[0, 1]
    # antisymmetric-part form: vee(A - A^T), A = Kp @ (R_d^T R_s)
    C = R_d.T @ R_s
    k0 = l2 * C[2, 1] - l1 * C[1, 2]
    k1 = l0 * C[0, 2] - l2 * C[2, 0]
    k2 = l1 * C[1, 0] - l0 * C[0, 1]
    if abs(s0 - k0) > 1e-8 or abs(s1 - k1) > 1e-8 or abs(s2 - k2) > 1e-8:
        raise ValueError("gradient form inconsistency")
    return np.array([k0, k1, k2])


def hessian_trace_potential(R_s: np.ndarray, R_d: np.ndarray, Kp_diag) -> np.ndarray:
    """Second derivative matrix of the trace potential in the right chart.

    Closed form: H = trace(A) I - (A + A^T)/2 with A = Kp R_d^T R_s. At
    R_s = R_d this is trace(Kp) I - Kp, positive definite for valid gains.
    """
    A = np.asarray(Kp_diag)[:, None] * (R_d.T @ R_s)
    return np.trace(A) * np.eye(3) - 0.5 * (A + A.T)


def error_norm(R_s: np.ndarray, R_d: np.ndarray, Kp_diag) -> float:
    """Attitude error norm sqrt(trace potential); zero iff R_s = R_d."""
    return float(np.sqrt(max(trace_potential(R_s, R_d, Kp_diag), 0.0)))


# --------------------------------------------------------------------------
# transported velocity error and covariant machinery


def velocity_error(
    R_s: np.ndarray, omega: np.ndarray, R_d: np.ndarray, omega_d: np.ndarray
) -> np.ndarray:
    """Body angular-velocity error under the right transport map.

    e = omega - R_s^T R_d omega_d; the transported identity
    R_s' - R_d' (R_d^T R_s) = R_s hat(e) holds along any trajectory pair.
    """
    return omega - R_s.T @ (R_d @ omega_d)


def connection_product(M: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Symmetric bilinear connection term M^{-1}(xi x M eta + eta x M xi)/2."""
    evals = np.linalg.eigvalsh(0.5 * (M + M.T))
    if np.abs(M - M.T).max() > 1e-9 * max(1.0, np.abs(M).max()) or evals[0] <= 0.0:
        raise ValueError("metric must be symmetric positive definite")
    return np.linalg.solve(
        M, 0.5 * (np.cross(xi, M @ eta) + np.cross(eta, M @ xi))
    )


def feedforward(p: RobotParams, s: RobotState, d: DesiredFrame) -> np.ndarray:
    """Metric-weighted covariant rate of the transported desired velocity.

    With eta = R_s^T w and w = R_d omega_d the inertial desired spin,
    eta' = -omega x eta + R_s^T w', so

        f = M(-omega x eta + R_s^T w') + (omega x M eta + eta x M omega)/2.

    Vanishes when the reference is at rest, and cancels the reference motion
    in the closed-loop error dynamics.
    """
    w = d.R_d @ d.omega_d
    w_dot = d.R_d @ d.omega_d_dot
    return _feedforward_raw(p, s.R, s.omega, s.gamma, w, w_dot)


def _feedforward_raw(p, R, omega, gamma, w_inertial, w_dot_inertial):
    a, b = p.lock_iso, p.lock_rank1
    eta = R.T @ w_inertial
    core = R.T @ w_dot_inertial - _cross(omega, eta)
    M_eta = a * eta - (b * float(gamma @ eta)) * gamma
    M_omega = a * omega - (b * float(gamma @ omega)) * gamma
    return (
        a * core
        - (b * float(gamma @ core)) * gamma
        + 0.5 * _cross(omega, M_eta)
        + 0.5 * _cross(eta, M_omega)
    )


# --------------------------------------------------------------------------
# energies


def tracking_energy(p: RobotParams, s: RobotState, d: DesiredFrame, Kp_diag) -> float:
    """Attitude error potential plus kinetic energy of the velocity error."""
    e = velocity_error(s.R, s.omega, d.R_d, d.omega_d)
    return trace_potential(s.R, d.R_d, Kp_diag) + 0.5 * float(
        e @ lock_inertia_apply(p, s.gamma, e)
    )


def position_potential(x: np.ndarray, x_d: np.ndarray) -> float:
    """Half squared distance of the shell center to its reference."""
    dx = x - x_d
    return 0.5 * float(dx @ dx)


def position_gradient_term(
    R_s: np.ndarray, x: np.ndarray, x_d: np.ndarray, r: float
) -> np.ndarray:
    """Body-frame pairing vector g = r R_s^T (e3 x (x - x_d)).

    Along rolling trajectories the position potential satisfies
    d/dt V1 = +<g, e_omega>, which fixes the sign of the position feedback.
    """
    d0 = x[0] - x_d[0]
    d1 = x[1] - x_d[1]
    return R_s.T @ np.array([-r * d1, r * d0, 0.0])


def _cross(a, b):
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )
