"""SO(3)/SE(3) primitives shared across the stack.

Conventions: rotations are 3x3 matrices acting on column vectors, angles in
radians, lengths in meters, times in seconds.  6-vectors stack translation
first, rotation second.  The pose retraction is split: translation is
additive, rotation is right-multiplied by an SO(3) exponential.  This keeps
the constant-velocity pose-prediction residual linear in translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "hat",
    "vee",
    "exp_so3",
    "log_so3",
    "right_jacobian_so3",
    "right_jacobian_inv_so3",
    "is_rotation",
    "require_rotation",
    "Pose",
    "Twist",
    "compose",
    "inverse",
    "boxplus",
    "boxminus",
]

_SMALL_ANGLE = 1e-8
_NEAR_PI = 1e-6


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix with hat(v) @ w == cross(v, w)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(m) -> np.ndarray:
    """Inverse of hat for a skew-symmetric matrix."""
    m = np.asarray(m, dtype=float)
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def exp_so3(omega) -> np.ndarray:
    """Rodrigues formula, with a Taylor fallback below 1e-8 rad."""
    omega = np.asarray(omega, dtype=float)
    theta = float(np.linalg.norm(omega))
    k = hat(omega)
    if theta < _SMALL_ANGLE:
        a = 1.0 - theta * theta / 6.0
        b = 0.5 - theta * theta / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * k + b * (k @ k)


def log_so3(rot) -> np.ndarray:
    """Rotation vector (angle * axis) of a rotation matrix.

    Angles land in [0, pi].  At angles within 1e-6 of pi the axis sign is
    ambiguous; we break the tie deterministically using the largest diagonal
    element of the matrix.
    """
    rot = np.asarray(rot, dtype=float)
    cos_theta = np.clip(0.5 * (np.trace(rot) - 1.0), -1.0, 1.0)
    theta = float(np.arccos(cos_theta))
    if theta < _SMALL_ANGLE:
        return 0.5 * vee(rot - rot.T)
    if np.pi - theta < _NEAR_PI:
        # R ~ 2 n n^T - I near pi, so n n^T ~ (R + I) / 2.
        diag = np.diag(rot)
        i = int(np.argmax(diag))
        axis = np.empty(3)
        axis[i] = np.sqrt(max(0.0, (diag[i] + 1.0) / 2.0))
        j, k = (i + 1) % 3, (i + 2) % 3
        axis[j] = (rot[i, j] + rot[j, i]) / (4.0 * axis[i])
        axis[k] = (rot[i, k] + rot[k, i]) / (4.0 * axis[i])
        sin_part = 0.5 * vee(rot - rot.T)
        if np.dot(axis, sin_part) < 0.0:
            axis = -axis
        return theta * axis / np.linalg.norm(axis)
    scale = theta / (2.0 * np.sin(theta))
    return scale * vee(rot - rot.T)


def right_jacobian_so3(omega) -> np.ndarray:
    """Right Jacobian of exp: exp(w + d) ~ exp(w) exp(Jr(w) d)."""
    omega = np.asarray(omega, dtype=float)
    theta = float(np.linalg.norm(omega))
    k = hat(omega)
    if theta < _SMALL_ANGLE:
        return np.eye(3) - 0.5 * k + (k @ k) / 6.0
    a = (1.0 - np.cos(theta)) / (theta * theta)
    b = (theta - np.sin(theta)) / (theta * theta * theta)
    return np.eye(3) - a * k + b * (k @ k)


def right_jacobian_inv_so3(omega) -> np.ndarray:
    """Inverse right Jacobian: log(exp(w) exp(d)) ~ w + Jr_inv(w) d."""
    omega = np.asarray(omega, dtype=float)
    theta = float(np.linalg.norm(omega))
    k = hat(omega)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + 0.5 * k + (k @ k) / 12.0
    sin_theta = np.sin(theta)
    if abs(sin_theta) < 1e-7:
        c = 1.0 / (theta * theta)
    else:
        c = 1.0 / (theta * theta) - (1.0 + np.cos(theta)) / (2.0 * theta * sin_theta)
    return np.eye(3) + 0.5 * k + c * (k @ k)


def is_rotation(rot, tol: float = 1e-9) -> bool:
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        return False
    ortho = np.linalg.norm(rot.T @ rot - np.eye(3))
    return ortho <= tol and abs(np.linalg.det(rot) - 1.0) <= tol

def require_rotation(rot, tol: float = 1e-9) -> np.ndarray:
    rot = np.asarray(rot, dtype=float)
    if not is_rotation(rot, tol):
        raise ValueError("matrix is not a valid rotation (orthonormality/determinant)")
    return rot


@dataclass
class Pose:
    """Rigid transform: rotation matrix plus translation vector (m)."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.rotation = np.array(self.rotation, dtype=float)
        self.translation = np.array(self.translation, dtype=float).reshape(3)
        if self.rotation.shape != (3, 3):
            raise ValueError("rotation must be 3x3")

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def copy(self) -> "Pose":
        return Pose(self.rotation.copy(), self.translation.copy())


@dataclass
class Twist:
    """Linear (m/s) and angular (rad/s) velocity."""

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.linear = np.array(self.linear, dtype=float).reshape(3)
        self.angular = np.array(self.angular, dtype=float).reshape(3)
        if not (np.all(np.isfinite(self.linear)) and np.all(np.isfinite(self.angular))):
            raise ValueError("twist components must be finite")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    @staticmethod
    def from_vector(v) -> "Twist":
        v = np.asarray(v, dtype=float).reshape(6)
        return Twist(v[:3], v[3:])


def compose(a: Pose, b: Pose) -> Pose:
    """Pose product a * b (apply b first, then a)."""
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def inverse(a: Pose) -> Pose:
    return Pose(a.rotation.T, -(a.rotation.T @ a.translation))


def boxplus(pose: Pose, delta: Twist, dt: float = 1.0) -> Pose:
    """Split retraction: t + v*dt, R * exp(w*dt)."""
    return Pose(
        pose.rotation @ exp_so3(delta.angular * dt),
        pose.translation + delta.linear * dt,
    )


def boxminus(pose2: Pose, pose1: Pose) -> np.ndarray:
    """Local inverse of boxplus: 6-vector [t2 - t1, log(R1^T R2)]."""
    return np.concatenate(
        [pose2.translation - pose1.translation, log_so3(pose1.rotation.T @ pose2.rotation)]
    )
