"""Rotation-group and so(3) primitives used throughout the package.

Conventions: rotation matrices are 3x3 row-major numpy arrays mapping body
coordinates to inertial coordinates; all angles are radians.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "hat",
    "vee",
    "exp_so3",
    "log_so3",
    "project_so3",
    "elem_rot",
    "inverse_dexp",
    "is_rotation",
]

# ||v|| below which series expansions replace the closed-form coefficients
_SMALL_ANGLE = 1e-8


def hat(v: np.ndarray) -> np.ndarray:
    """Skew matrix of a 3-vector: hat(v) @ w == cross(v, w)."""
    v0, v1, v2 = float(v[0]), float(v[1]), float(v[2])
    return np.array([[0.0, -v2, v1], [v2, 0.0, -v0], [-v1, v0, 0.0]])


def vee(S: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Inverse of hat. Raises ValueError if S is not antisymmetric within tol."""
    defect = np.abs(S + S.T).max()
    if defect > tol:
        raise ValueError(f"not antisymmetric: |S + S^T| = {defect:.3e} > {tol:.1e}")
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def exp_so3(v: np.ndarray) -> np.ndarray:
    """Rotation by the axis-angle vector v (Rodrigues formula).

    Falls back to the second-order Taylor expansion of the coefficients for
    ||v|| < 1e-8, which is exact to well below double roundoff there.
    """
    v0, v1, v2 = float(v[0]), float(v[1]), float(v[2])
    th2 = v0 * v0 + v1 * v1 + v2 * v2
    if th2 < _SMALL_ANGLE * _SMALL_ANGLE:
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        th = math.sqrt(th2)
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    return np.array(
        [
            [1.0 - b * (v1 * v1 + v2 * v2), -a * v2 + b * v0 * v1, a * v1 + b * v0 * v2],
            [a * v2 + b * v0 * v1, 1.0 - b * (v0 * v0 + v2 * v2), -a * v0 + b * v1 * v2],
            [-a * v1 + b * v0 * v2, a * v0 + b * v1 * v2, 1.0 - b * (v0 * v0 + v1 * v1)],
        ]
    )


def log_so3(R: np.ndarray) -> np.ndarray:
    """Axis-angle vector of R; requires the rotation angle to be below pi - 1e-6."""
    c = 0.5 * (np.trace(R) - 1.0)
    theta = float(np.arccos(np.clip(c, -1.0, 1.0)))
    if theta >= np.pi - 1e-6:
        raise ValueError(f"log near cut locus: rotation angle {theta:.8f} rad")
    w = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta < _SMALL_ANGLE:
        # theta/sin(theta) = 1 + theta^2/6 + ...
        return w * (1.0 + theta * theta / 6.0)
    return w * (theta / np.sin(theta))


def project_so3(A: np.ndarray) -> np.ndarray:
    """Nearest rotation to A in Frobenius norm (orthogonal polar factor via SVD)."""
    if np.linalg.det(A) <= 0.0:
        raise ValueError("non-orientable input: det(A) <= 0")
    U, s, Vt = np.linalg.svd(A)
    if s[-1] < 1e-12 * s[0]:
        raise ValueError("non-orientable input: singular-value collapse")
    R = U @ Vt
    if np.linalg.det(R) < 0.0:  # cannot happen for det(A) > 0; guard anyway
        R = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return R


def elem_rot(axis: int, angle: float) -> np.ndarray:
    """Elementary rotation about coordinate axis 1, 2 or 3 by `angle` radians."""
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    v = np.zeros(3)
    v[axis - 1] = angle
    return exp_so3(v)


def inverse_dexp(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Map a body angular velocity w to the rate of the exponential coordinate.

    For R(t) = R0 @ exp_so3(u(t)) with body velocity w = vee(R^T dR/dt), the
    coordinate rate is u' = w + u x w / 2 + c2(||u||) u x (u x w). Used by the
    integrator's stage correction and by chart computations.
    """
    u0, u1, u2 = float(u[0]), float(u[1]), float(u[2])
    w0, w1, w2 = float(w[0]), float(w[1]), float(w[2])
    th2 = u0 * u0 + u1 * u1 + u2 * u2
    if th2 < 1e-12:
        c2 = 1.0 / 12.0 + th2 / 720.0
    else:
        th = math.sqrt(th2)
        c2 = (1.0 - 0.5 * th / math.tan(0.5 * th)) / th2
    x0 = u1 * w2 - u2 * w1
    x1 = u2 * w0 - u0 * w2
    x2 = u0 * w1 - u1 * w0
    return np.array(
        [
            w0 + 0.5 * x0 + c2 * (u1 * x2 - u2 * x1),
            w1 + 0.5 * x1 + c2 * (u2 * x0 - u0 * x2),
            w2 + 0.5 * x2 + c2 * (u0 * x1 - u1 * x0),
        ]
    )


def renormalize_rotation(R: np.ndarray) -> np.ndarray:
    """One Newton step toward the orthogonal polar factor: R (3I - R^T R) / 2.

    For near-orthogonal input with defect eps this agrees with project_so3 to
    O(eps^2); used by the integrator, where the multiplicative update already
    keeps the defect near roundoff and a full SVD per step is wasted.
    """
    return R @ (1.5 * _I3 - 0.5 * (R.T @ R))


_I3 = np.eye(3)


def is_rotation(R: np.ndarray, tol: float = 1e-12) -> bool:
    """True if R^T R = I and det R = 1 within tol."""
    return (
        np.abs(R.T @ R - np.eye(3)).max() <= tol
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # scalar form; np.cross dominates profiles when called per integrator stage
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )
