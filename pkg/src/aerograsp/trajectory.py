"""Minimum-snap grasp trajectories and moving-frame setpoint transforms.

A single degree-10 polynomial per axis spans both trajectory segments
(start -> grasp point -> terminal hover).  The equality-constrained QP is
solved exactly through its KKT linear system; time is normalized to [0, 1]
internally to keep the snap Gram matrix well conditioned, and coefficients
are rescaled back to absolute time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from numpy.polynomial import polynomial as npp

from .geometry import require_rotation

N_COEFFS = 11  # degree-10 polynomial

__all__ = [
    "DegenerateTimingError",
    "BoundaryConditions",
    "Setpoint",
    "FrameState",
    "PolynomialTrajectory",
    "plan_min_snap",
    "yaw_policy",
    "to_fixed_frame",
]


class DegenerateTimingError(ValueError):
    """Raised when grasp/terminal timing makes the KKT system singular."""


@dataclass
class BoundaryConditions:
    """Start, grasp, and terminal constraints for one grasp attempt.

    Positions are in the planning frame (m); ``vg`` is the grasp velocity
    (m/s); ``tg``/``tf`` the grasp and terminal times (s).
    """

    x0: np.ndarray
    xg: np.ndarray
    vg: np.ndarray
    xf: np.ndarray
    tg: float
    tf: float

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float).reshape(3)
        self.xg = np.asarray(self.xg, dtype=float).reshape(3)
        self.vg = np.asarray(self.vg, dtype=float).reshape(3)
        self.xf = np.asarray(self.xf, dtype=float).reshape(3)
        self.tg = float(self.tg)
        self.tf = float(self.tf)
        if not (0.0 < self.tg < self.tf):
            raise ValueError("boundary conditions require 0 < tg < tf")
        if self.tg <= 0.01 or self.tf - self.tg <= 0.01:
            raise DegenerateTimingError("tg and tf - tg must both exceed 0.01 s")


@dataclass
class Setpoint:
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    yaw: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        self.acceleration = np.asarray(self.acceleration, dtype=float).reshape(3)
        self.yaw = float(self.yaw)


@dataclass
class FrameState:
    """Kinematics of the moving target frame in the fixed odometry frame."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular_acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        self.acceleration = np.asarray(self.acceleration, dtype=float).reshape(3)
        self.rotation = require_rotation(self.rotation, tol=1e-8)
        self.angular_velocity = np.asarray(self.angular_velocity, dtype=float).reshape(3)
        self.angular_acceleration = np.asarray(self.angular_acceleration, dtype=float).reshape(3)


def _basis_row(s: float, order: int) -> np.ndarray:
    """Row of the order-th derivative of monomials s^0..s^10 at s."""
    row = np.zeros(N_COEFFS)
    for i in range(order, N_COEFFS):
        row[i] = factorial(i) / factorial(i - order) * s ** (i - order)
    return row


def _snap_gram(scale: float = 1.0) -> np.ndarray:
    """Gram matrix of 4th-derivative monomials over [0, scale]."""
    h = np.zeros((N_COEFFS, N_COEFFS))
    for i in range(4, N_COEFFS):
        fi = factorial(i) / factorial(i - 4)
        for j in range(4, N_COEFFS):
            fj = factorial(j) / factorial(j - 4)
            h[i, j] = fi * fj * scale ** (i + j - 7) / (i + j - 7)
    return h


def _constraint_matrix(sg: float) -> np.ndarray:
    """9 equality constraints (pos/vel/acc at s=0, sg, 1) on normalized time."""
    rows = []
    for s in (0.0, sg, 1.0):
        for order in (0, 1, 2):
            rows.append(_basis_row(s, order))
    return np.array(rows)


def _plan_axis(sg: float, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve one axis on normalized time; returns (coeffs, multipliers)."""
    h = _snap_gram()
    a = _constraint_matrix(sg)
    n, m = N_COEFFS, a.shape[0]
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = h
    kkt[:n, n:] = a.T
    kkt[n:, :n] = a
    rhs = np.concatenate([np.zeros(n), b])
    try:
        sol = np.linalg.solve(kkt, rhs)
        # One step of iterative refinement keeps KKT residuals near machine
        # precision despite the wide dynamic range of the Gram matrix.
        sol += np.linalg.solve(kkt, rhs - kkt @ sol)
    except np.linalg.LinAlgError as exc:
        raise DegenerateTimingError(f"singular KKT system (sg={sg})") from exc
    return sol[:n], sol[n:]


@dataclass
class PolynomialTrajectory:
    """Per-axis degree-10 coefficients (ascending powers, absolute time)."""

    coeffs: np.ndarray  # (3, 11)
    tg: float
    tf: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(3, N_COEFFS)
        self.tg = float(self.tg)
        self.tf = float(self.tf)

    def derivative(self, t: float, order: int) -> np.ndarray:
        """order-th time derivative at t, clamped to [0, tf]."""
        t = min(max(float(t), 0.0), self.tf)
        out = np.empty(3)
        for axis in range(3):
            c = npp.polyder(self.coeffs[axis], m=order) if order else self.coeffs[axis]
            out[axis] = npp.polyval(t, c)
        return out

    def position(self, t: float) -> np.ndarray:
        return self.derivative(t, 0)

    def velocity(self, t: float) -> np.ndarray:
        return self.derivative(t, 1)

    def acceleration(self, t: float) -> np.ndarray:
        return self.derivative(t, 2)

    def jerk(self, t: float) -> np.ndarray:
        return self.derivative(t, 3)

    def snap(self, t: float) -> np.ndarray:
        return self.derivative(t, 4)

    def setpoint(self, t: float, yaw: float = 0.0) -> Setpoint:
        return Setpoint(self.position(t), self.velocity(t), self.acceleration(t), yaw)

    def snap_cost(self) -> float:
        """Integral of squared snap over [0, tf], from the Gram matrix."""
        h = _snap_gram(scale=1.0)
        # Evaluate on normalized time: c_norm_i = c_i * tf^i, cost scales tf^-7.
        powers = self.tf ** np.arange(N_COEFFS)
        total = 0.0
        for axis in range(3):
            d = self.coeffs[axis] * powers
            total += float(d @ h @ d) * self.tf ** (-7)
        return total


def plan_min_snap(bc: BoundaryConditions) -> PolynomialTrajectory:
    """Minimum-snap boundary-value problem, one polynomial per axis.

    Minimizes the integral of squared snap subject to the nine pos/vel/acc
    constraints at t = 0, tg, tf, via the KKT system of the equality
    constrained QP.
    """
    sg = bc.tg / bc.tf
    coeffs = np.empty((3, N_COEFFS))
    powers = bc.tf ** np.arange(N_COEFFS)
    for axis in range(3):
        b = np.array(
            [
                bc.x0[axis], 0.0, 0.0,
                bc.xg[axis], bc.vg[axis] * bc.tf, 0.0,
                bc.xf[axis], 0.0, 0.0,
            ]
        )
        d, _ = _plan_axis(sg, b)
        coeffs[axis] = d / powers
    return PolynomialTrajectory(coeffs, bc.tg, bc.tf)


def yaw_policy(drone_pos, target_pos, t: float, tg: float, frozen_yaw: float) -> float:
    """Heading toward the target before grasp; held at frozen_yaw afterwards.

    Horizontally coincident drone/target pre-grasp also returns frozen_yaw.
    """
    if t >= tg:
        return float(frozen_yaw)
    dx = float(target_pos[0] - drone_pos[0])
    dy = float(target_pos[1] - drone_pos[1])
    if np.hypot(dx, dy) < 1e-9:
        return float(frozen_yaw)
    return float(np.arctan2(dy, dx))


def to_fixed_frame(sp_obj: Setpoint, fs: FrameState) -> Setpoint:
    """Transform an object-frame setpoint into the fixed odometry frame.

    Applies the rotating/accelerating-frame composition: frame kinematics
    plus Coriolis (2 w x v), centripetal (w x (w x r)), and Euler (alpha x r)
    terms.  Yaw passes through unchanged.
    """
    r = fs.rotation
    w = fs.angular_velocity
    al = fs.angular_acceleration
    x_om = r @ sp_obj.position
    v_om = r @ sp_obj.velocity
    a_om = r @ sp_obj.acceleration
    pos = fs.position + x_om
    vel = fs.velocity + np.cross(w, x_om) + v_om
    acc = (
        fs.acceleration
        + np.cross(al, x_om)
        + np.cross(w, np.cross(w, x_om))
        + 2.0 * np.cross(w, v_om)
        + a_om
    )
    return Setpoint(pos, vel, acc, sp_obj.yaw)
