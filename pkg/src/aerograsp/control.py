"""Geometric SE(3) tracking controller with translational disturbance adaptation.

Thrust and torque follow the geometric tracking form

    f   = -bz^T (kp*ep + kv*ev + m*g - m*add + theta_hat)
    tau = -kr*eR - kW*eW + J R^T Rd dWd + (R^T Rd Wd)^ J R^T Rd Wd

with errors ep = p - pd, ev = v - vd, eR = 0.5*(Rd^T R - R^T Rd)^vee,
eW = W - R^T Rd Wd.  The disturbance estimate integrates
theta_hat <- Proj(theta_hat + dt * gamma_f * (ev + k_af * ep)) where Proj is
a radial clamp onto the ball of radius theta_max (explicit Euler at the
control rate).  The desired rotation is the standard differential-flatness
construction from the commanded force direction and a yaw heading.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import hat, vee
from .trajectory import Setpoint

__all__ = [
    "DegenerateAttitudeError",
    "VehicleParams",
    "ControlGains",
    "ControllerState",
    "VehicleState",
    "Wrench",
    "desired_rotation",
    "compute_wrench",
]


class DegenerateAttitudeError(ValueError):
    """Commanded force vanishes or is parallel to the yaw heading."""


@dataclass
class VehicleParams:
    mass: float = 1.5
    inertia: np.ndarray = field(default_factory=lambda: np.diag([0.02, 0.02, 0.035]))
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    f_max: float = np.inf

    def __post_init__(self):
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        self.gravity = np.asarray(self.gravity, dtype=float).reshape(3)
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if np.linalg.norm(self.inertia - self.inertia.T) > 1e-12:
            raise ValueError("inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0):
            raise ValueError("inertia must be positive definite")


@dataclass
class ControlGains:
    kp: float = 20.0
    kv: float = 8.0
    kr: float = 6.0
    komega: float = 1.0
    gamma_f: float = 12.0
    k_af: float = 3.0
    theta_max: float = 5.0

    def __post_init__(self):
        for name in ("kp", "kv", "kr", "komega", "gamma_f", "k_af", "theta_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class ControllerState:
    """Estimated translational disturbance force (N), kept inside the ball."""

    theta_hat: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.theta_hat = np.asarray(self.theta_hat, dtype=float).reshape(3)


@dataclass
class VehicleState:
    position: np.ndarray
    velocity: np.ndarray
    rotation: np.ndarray
    body_rate: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        self.rotation = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        self.body_rate = np.asarray(self.body_rate, dtype=float).reshape(3)


@dataclass
class Wrench:
    thrust: float
    torque: np.ndarray

    def __post_init__(self):
        self.thrust = float(self.thrust)
        self.torque = np.asarray(self.torque, dtype=float).reshape(3)


def _project_ball(v: np.ndarray, radius: float) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm <= radius:
        return v
    return v * (radius / norm)


def desired_rotation(a_cmd, yaw_d: float) -> np.ndarray:
    """Desired attitude from a force-like command (N) and yaw heading.

    Body z is -a_cmd normalized, sign-adjusted so thrust opposes gravity
    (positive world-z component); body x comes from the yaw heading
    projected orthogonal to body z.
    """
    a_cmd = np.asarray(a_cmd, dtype=float).reshape(3)
    norm = np.linalg.norm(a_cmd)
    if norm <= 1e-6:
        raise DegenerateAttitudeError("commanded force is numerically zero")
    b3 = -a_cmd / norm
    if b3[2] < 0.0:
        b3 = -b3
    heading = np.array([np.cos(yaw_d), np.sin(yaw_d), 0.0])
    b2 = np.cross(b3, heading)
    n2 = np.linalg.norm(b2)
    if n2 < 1e-9:
        raise DegenerateAttitudeError("yaw heading parallel to thrust axis")
    b2 /= n2
    b1 = np.cross(b2, b3)
    return np.column_stack([b1, b2, b3])


def compute_wrench(
    state: VehicleState,
    sp: Setpoint,
    omega_d,
    domega_d,
    ctrl: ControllerState,
    params: VehicleParams,
    gains: ControlGains,
    dt: float,
) -> tuple[Wrench, ControllerState]:
    """One control step: wrench from the current estimate, then adaptation.

    Pure in (inputs -> outputs); the returned ControllerState carries the
    projected disturbance estimate for the next step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    omega_d = np.asarray(omega_d, dtype=float).reshape(3)
    domega_d = np.asarray(domega_d, dtype=float).reshape(3)
    e_p = state.position - sp.position
    e_v = state.velocity - sp.velocity

    a_cmd = (
        gains.kp * e_p
        + gains.kv * e_v
        + params.mass * params.gravity
        - params.mass * sp.acceleration
        + ctrl.theta_hat
    )
    r = state.rotation
    b_z = r[:, 2]
    thrust = float(np.clip(-b_z @ a_cmd, 0.0, params.f_max))

    r_d = desired_rotation(a_cmd, sp.yaw)
    e_r = 0.5 * vee(r_d.T @ r - r.T @ r_d)
    rtrd = r.T @ r_d
    e_w = state.body_rate - rtrd @ omega_d
    j = params.inertia
    w_d_body = rtrd @ omega_d
    torque = (
        -gains.kr * e_r
        - gains.komega * e_w
        + j @ (rtrd @ domega_d)
        + hat(w_d_body) @ j @ w_d_body
    )

    theta_new = _project_ball(
        ctrl.theta_hat + dt * gains.gamma_f * (e_v + gains.k_af * e_p),
        gains.theta_max,
    )
    return Wrench(thrust, torque), ControllerState(theta_new)
