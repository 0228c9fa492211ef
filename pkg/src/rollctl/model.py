"""Physical parameters, state containers and the reduced equations of motion.

The sphere shell carries three orthogonal internal rotors. States are kept in
two equivalent forms: a velocity form (shell body rate and rotor rates) used
for controller synthesis, and a momentum form (shell and rotor angular
momenta) used as the canonical integration target. The vertical direction
expressed in the body frame, gamma = R^T e3, enters the locked inertia and the
rolling constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liegroup import is_rotation

__all__ = [
    "E3",
    "RobotParams",
    "RobotState",
    "MomentumState",
    "lock_inertia",
    "body_momentum",
    "rolling_velocity",
    "advection_rate",
    "dynamics_velocity_form",
    "dynamics_momentum_form",
    "inertial_momentum",
    "VelocityRates",
    "MomentumRates",
]

E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class RobotParams:
    """Masses, geometry and inertias of the shell-plus-rotors assembly.

    Attributes:
        m_s: shell mass [kg]
        m_rotor: mass of each of the three rotors [kg]
        r: shell radius [m]
        I_s_diag: shell inertia diagonal, three equal entries [kg m^2]
        J_a: rotor spin-axis inertia [kg m^2]
        J_b: rotor transverse inertia, J_a = 2 J_b [kg m^2]
    """

    m_s: float = 1.0
    m_rotor: float = 0.672
    r: float = 0.176
    I_s_diag: tuple[float, float, float] = (0.0153, 0.0153, 0.0153)
    J_a: float = 0.672e-4
    J_b: float = field(default=0.336e-4)

    # derived, set on construction (plain attributes: these sit in hot loops)
    m_T: float = field(init=False, repr=False, compare=False, default=0.0)
    i_s: float = field(init=False, repr=False, compare=False, default=0.0)
    lock_iso: float = field(init=False, repr=False, compare=False, default=0.0)
    lock_rank1: float = field(init=False, repr=False, compare=False, default=0.0)

    def __post_init__(self):
        if min(self.m_s, self.m_rotor, self.r, self.J_a, self.J_b) <= 0.0:
            raise ValueError("all physical parameters must be strictly positive")
        if min(self.I_s_diag) <= 0.0:
            raise ValueError("shell inertia entries must be strictly positive")
        if abs(self.I_s_diag[0] - self.I_s_diag[1]) > 1e-12 or abs(
            self.I_s_diag[0] - self.I_s_diag[2]
        ) > 1e-12:
            raise ValueError("shell inertia must be isotropic (equal diagonal entries)")
        if abs(self.J_a - 2.0 * self.J_b) > 1e-12:
            raise ValueError("rotor inertias must satisfy J_a = 2 J_b")
        object.__setattr__(self, "m_T", self.m_s + 3.0 * self.m_rotor)
        object.__setattr__(self, "i_s", float(self.I_s_diag[0]))
        object.__setattr__(self, "lock_rank1", self.m_T * self.r * self.r)
        object.__setattr__(self, "lock_iso", self.i_s + self.lock_rank1)

    @classmethod
    def default(cls) -> "RobotParams":
        """Reference parameter set used by the bundled presets and tests."""
        return cls()


def _check_unit(gamma: np.ndarray, tol: float) -> None:
    n = float(gamma @ gamma)
    if abs(n - 1.0) > 2.0 * tol:  # tol on the norm, ~2*tol on the square
        raise ValueError(f"gamma not on sphere: ||gamma|| = {np.sqrt(n):.9f}")


@dataclass
class RobotState:
    """Full simulation state in velocity form.

    R: shell attitude (body -> inertial); omega: shell body angular velocity
    [rad/s]; theta: unwrapped rotor angles [rad]; theta_dot: rotor rates
    [rad/s]; x: shell-center position, inertial [m]; gamma: inertial vertical
    in body coordinates (= R^T e3, unit).
    """

    R: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    x: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_attitude(
        cls,
        R: np.ndarray,
        omega=(0.0, 0.0, 0.0),
        theta=(0.0, 0.0, 0.0),
        theta_dot=(0.0, 0.0, 0.0),
        x=(0.0, 0.0, 0.0),
    ) -> "RobotState":
        """Build a state with gamma derived from R (the only consistent choice)."""
        R = np.asarray(R, dtype=float)
        return cls(
            R=R,
            omega=np.asarray(omega, dtype=float),
            theta=np.asarray(theta, dtype=float),
            theta_dot=np.asarray(theta_dot, dtype=float),
            x=np.asarray(x, dtype=float),
            gamma=R.T @ E3,
        )

    def validate(self) -> None:
        """Raise ValueError on any violated state invariant."""
        if not is_rotation(self.R, tol=1e-12):
            raise ValueError("R is not a rotation matrix within 1e-12")
        _check_unit(self.gamma, 1e-9)
        if np.abs(self.gamma - self.R.T @ E3).max() > 1e-8:
            raise ValueError("gamma inconsistent with R^T e3 beyond 1e-8")
        for name in ("omega", "theta", "theta_dot", "x"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")


@dataclass
class MomentumState:
    """Simulation state in momentum form.

    pi_s is the shell angular momentum conjugate to omega (body frame);
    pi_rotor the rotor momenta. Remaining fields as in RobotState.
    """

    R: np.ndarray
    pi_s: np.ndarray
    pi_rotor: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_velocity(cls, p: RobotParams, s: RobotState) -> "MomentumState":
        pi_s = body_momentum(p, s.omega, s.theta_dot, s.gamma)
        pi_rotor = p.J_a * (s.omega + s.theta_dot)
        return cls(
            R=s.R.copy(),
            pi_s=pi_s,
            pi_rotor=pi_rotor,
            theta=s.theta.copy(),
            x=s.x.copy(),
            gamma=s.gamma.copy(),
        )

    def to_velocity(self, p: RobotParams) -> RobotState:
        omega, theta_dot = _recover_rates(p, self.pi_s, self.pi_rotor, self.gamma)
        return RobotState(
            R=self.R.copy(),
            omega=omega,
            theta=self.theta.copy(),
            theta_dot=theta_dot,
            x=self.x.copy(),
            gamma=self.gamma.copy(),
        )


# --------------------------------------------------------------------------
# core operations


def lock_inertia(p: RobotParams, gamma: np.ndarray) -> np.ndarray:
    """Locked inertia M(gamma) = I^s - m_T r^2 hat(gamma)^2 felt by the shell.

    Equals i_s*I + m_T r^2 (I - gamma gamma^T): symmetric positive definite
    with eigenvalues {i_s, i_s + m_T r^2, i_s + m_T r^2} for unit gamma.
    """
    _check_unit(gamma, 1e-6)
    return p.lock_iso * np.eye(3) - p.lock_rank1 * np.outer(gamma, gamma)


def lock_inertia_apply(p: RobotParams, gamma: np.ndarray, v: np.ndarray) -> np.ndarray:
    """M(gamma) @ v without forming the matrix."""
    return p.lock_iso * v - (p.lock_rank1 * float(gamma @ v)) * gamma


def lock_inertia_solve(p: RobotParams, gamma: np.ndarray, v: np.ndarray) -> np.ndarray:
    """M(gamma)^{-1} @ v via the rank-one (Sherman-Morrison) closed form."""
    a = p.lock_iso
    return v / a + (p.lock_rank1 * float(gamma @ v) / (a * p.i_s)) * gamma


def body_momentum(
    p: RobotParams, omega: np.ndarray, theta_dot: np.ndarray, gamma: np.ndarray
) -> np.ndarray:
    """Shell angular momentum: (M(gamma) + J) omega + J theta_dot."""
    _check_unit(gamma, 1e-6)
    return lock_inertia_apply(p, gamma, omega) + p.J_a * (omega + theta_dot)


def rolling_velocity(R: np.ndarray, omega: np.ndarray, r: float) -> np.ndarray:
    """Shell-center velocity (R omega) x r e3 under rolling without slipping.

    The third component is exactly zero: the center height never changes.
    """
    wI = R @ omega
    return np.array([r * wI[1], -r * wI[0], 0.0])


def advection_rate(omega: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Rate of the body-frame vertical: gamma' = -omega x gamma."""
    return np.array(
        [
            omega[2] * gamma[1] - omega[1] * gamma[2],
            omega[0] * gamma[2] - omega[2] * gamma[0],
            omega[1] * gamma[0] - omega[0] * gamma[1],
        ]
    )


@dataclass
class VelocityRates:
    """Time derivatives of a RobotState (R enters via its body rate omega)."""

    omega: np.ndarray          # R' = R hat(omega)
    omega_dot: np.ndarray
    theta_dot: np.ndarray
    theta_ddot: np.ndarray
    x_dot: np.ndarray
    gamma_dot: np.ndarray


def dynamics_velocity_form(p: RobotParams, s: RobotState, u: np.ndarray) -> VelocityRates:
    """Recast (velocity-form) equations of motion under rotor torque u.

        M(gamma) omega' = (I^s omega + J theta_dot) x omega - u
        theta''        = u / J_a - omega'
    """
    rhs = _cross(p.i_s * s.omega + p.J_a * s.theta_dot, s.omega) - u
    omega_dot = lock_inertia_solve(p, s.gamma, rhs)
    return VelocityRates(
        omega=s.omega.copy(),
        omega_dot=omega_dot,
        theta_dot=s.theta_dot.copy(),
        theta_ddot=u / p.J_a - omega_dot,
        x_dot=rolling_velocity(s.R, s.omega, p.r),
        gamma_dot=advection_rate(s.omega, s.gamma),
    )


@dataclass
class MomentumRates:
    """Time derivatives of a MomentumState."""

    omega: np.ndarray          # R' = R hat(omega), recovered from the momenta
    pi_s_dot: np.ndarray
    pi_rotor_dot: np.ndarray
    theta_dot: np.ndarray
    x_dot: np.ndarray
    gamma_dot: np.ndarray


def dynamics_momentum_form(p: RobotParams, s: MomentumState, u: np.ndarray) -> MomentumRates:
    """Momentum-form equations of motion: pi_s' = pi_s x omega, pi_rotor' = u.

    The rates (omega, theta_dot) solve the joint linear system
    pi_s = (M + J) omega + J theta_dot, pi_rotor = J (omega + theta_dot);
    subtracting the second row decouples it to omega = M^{-1}(pi_s - pi_rotor).
    """
    omega, theta_dot = _recover_rates(p, s.pi_s, s.pi_rotor, s.gamma)
    return MomentumRates(
        omega=omega,
        pi_s_dot=_cross(s.pi_s, omega),
        pi_rotor_dot=np.asarray(u, dtype=float),
        theta_dot=theta_dot,
        x_dot=rolling_velocity(s.R, omega, p.r),
        gamma_dot=advection_rate(omega, s.gamma),
    )


def inertial_momentum(R: np.ndarray, pi_s: np.ndarray) -> np.ndarray:
    """Shell angular momentum seen from the inertial frame: R pi_s.

    Conserved along every trajectory regardless of the rotor torque, because
    the torque only transfers momentum between shell and rotors.
    """
    return R @ pi_s


def _recover_rates(p, pi_s, pi_rotor, gamma):
    _check_unit(gamma, 1e-6)
    omega = lock_inertia_solve(p, gamma, pi_s - pi_rotor)
    if not np.all(np.isfinite(omega)):
        raise ValueError("locked-inertia solve produced non-finite rates")
    return omega, pi_rotor / p.J_a - omega


def _cross(a, b):
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )
