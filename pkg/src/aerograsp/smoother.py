"""Fixed-lag sliding-window estimator of target pose and velocity.

The target follows a nearly-constant-velocity model on SE(3).  Over a window
of buffered pose measurements we minimize

    sum_k  ||T_k [-] That_k||^2_{W1}
         + ||(T_k [+] xi_k dt) [-] T_{k+1}||^2_{W2}
         + ||xi_k - xi_{k+1}||^2_{W3}
         + ||xi_k||^2_{W4}

with damped Gauss-Newton on the manifold (split retraction from
``geometry``).  The weight matrices are information matrices: W1^-1 adds the
drone odometry covariance to an isotropic block-diagonal, W2..W4 are purely
block-diagonal.  Batch Gauss-Newton over the window replaces an incremental
solver; at window sizes <= 100 this is fast and simple to verify.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Pose,
    Twist,
    boxminus,
    boxplus,
    exp_so3,
    log_so3,
    right_jacobian_inv_so3,
    right_jacobian_so3,
)

__all__ = [
    "SmootherConfig",
    "TargetTrack",
    "FixedLagSmoother",
    "weight_matrices",
    "OrderingError",
    "NotInitializedError",
]


class OrderingError(ValueError):
    """Measurement stamp arrived out of order (or duplicated)."""


class NotInitializedError(RuntimeError):
    """latest()/solve() called before any measurement or solve."""


@dataclass
class SmootherConfig:
    """Window length, timestep, and weight scalars.

    t1..t4 scale the translation blocks and r1..r4 the rotation blocks of
    the inverse weights (Table-style parameterization; t4 = 10 (m/s)^2 and
    r4 = 1 (rad/s)^2 are the published regularizer values).  t1..t3 and
    r1..r3 defaults are artifact choices.  ``sigma_d`` is the 6x6 drone
    odometry covariance entering W1^-1.
    """

    window: int = 20
    dt: float = 1.0 / 14.0
    t1: float = 1e-4
    t2: float = 1e-2
    t3: float = 1e-2
    t4: float = 10.0
    r1: float = 1e-4
    r2: float = 1e-2
    r3: float = 1e-2
    r4: float = 1.0
    sigma_d: np.ndarray = field(default_factory=lambda: np.zeros((6, 6)))
    rotate_measurement_noise: bool = False
    max_iterations: int = 50
    rel_tol: float = 1e-10

    def __post_init__(self):
        self.sigma_d = np.asarray(self.sigma_d, dtype=float).reshape(6, 6)
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for name in ("t1", "t2", "t3", "t4", "r1", "r2", "r3", "r4"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if np.linalg.norm(self.sigma_d - self.sigma_d.T) > 1e-12:
            raise ValueError("sigma_d must be symmetric")
        if np.any(np.linalg.eigvalsh(self.sigma_d) < -1e-12):
            raise ValueError("sigma_d must be positive semidefinite")


def _blockdiag(t: float, r: float) -> np.ndarray:
    m = np.zeros((6, 6))
    m[:3, :3] = t * np.eye(3)
    m[3:, 3:] = r * np.eye(3)
    return m


def weight_matrices(cfg: SmootherConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Information matrices (W1..W4) from the config scalars and sigma_d."""
    inv1 = cfg.sigma_d + _blockdiag(cfg.t1, cfg.r1)
    try:
        w1 = np.linalg.inv(inv1)
    except np.linalg.LinAlgError as exc:
        raise ValueError("W1^-1 (sigma_d + blockdiag) is not invertible") from exc
    w1 = 0.5 * (w1 + w1.T)
    w2 = _blockdiag(1.0 / cfg.t2, 1.0 / cfg.r2)
    w3 = _blockdiag(1.0 / cfg.t3, 1.0 / cfg.r3)
    w4 = _blockdiag(1.0 / cfg.t4, 1.0 / cfg.r4)
    return w1, w2, w3, w4


@dataclass
class TargetTrack:
    """Windowed pose/twist estimate; the last element feeds the planner."""

    poses: list
    twists: list
    stamps: np.ndarray
    converged: bool = True
    iterations: int = 0
    cost_history: list = field(default_factory=list)


class FixedLagSmoother:
    """Single-writer sliding-window smoother (push/solve mutate state)."""

    def __init__(self, cfg: SmootherConfig | None = None):
        self.cfg = cfg or SmootherConfig()
        self._weights = weight_matrices(self.cfg)
        self._measurements: list[Pose] = []
        self._stamps: list[float] = []
        self._track: TargetTrack | None = None

    def push(self, measurement: Pose, stamp: float) -> None:
        """Buffer a global-frame pose measurement; evicts beyond the window."""
        stamp = float(stamp)
        if self._stamps and stamp <= self._stamps[-1]:
            raise OrderingError(
                f"stamp {stamp} is not after the last stamp {self._stamps[-1]}"
            )
        self._measurements.append(measurement.copy())
        self._stamps.append(stamp)
        if len(self._measurements) > self.cfg.window:
            self._measurements.pop(0)
            self._stamps.pop(0)

    def __len__(self) -> int:
        return len(self._measurements)

    # -- residual model ----------------------------------------------------

    def _initial_state(self) -> tuple[list[Pose], np.ndarray]:
        poses = [m.copy() for m in self._measurements]
        k = len(poses)
        twists = np.zeros((k, 6))
        for i in range(1, k):
            twists[i] = boxminus(poses[i], poses[i - 1]) / self.cfg.dt
        return poses, twists

    def _measurement_weight(self, index: int) -> np.ndarray:
        w1 = self._weights[0]
        if not self.cfg.rotate_measurement_noise:
            return w1
        r = self._measurements[index].rotation
        b = np.zeros((6, 6))
        b[:3, :3] = r
        b[3:, 3:] = r
        return b @ w1 @ b.T

    def _blocks(self, poses: list[Pose], twists: np.ndarray):
        """Residual blocks: (residual, [(state_index, kind, 6x6 jac)], weight).

        kind 0 refers to the pose block of state k, kind 1 to its twist
        block.  Jacobians are with respect to the split-retraction tangent
        [dt(3), dphi(3)] / [dv(3), dw(3)].
        """
        w1, w2, w3, w4 = self._weights
        dt = self.cfg.dt
        k = len(poses)
        eye6 = np.eye(6)
        blocks = []
        for i in range(k):
            # Measurement prior.
            r0 = boxminus(poses[i], self._measurements[i])
            jac = np.eye(6)
            jac[3:, 3:] = right_jacobian_inv_so3(r0[3:])
            blocks.append((r0, [(i, 0, jac)], self._measurement_weight(i)))
            # Twist magnitude regularizer.
            blocks.append((twists[i].copy(), [(i, 1, eye6)], w4))
        for i in range(k - 1):
            # Constant-velocity pose prediction.
            pred = boxplus(poses[i], Twist(twists[i, :3], twists[i, 3:]), dt)
            r = boxminus(pred, poses[i + 1])
            c = exp_so3(twists[i, 3:] * dt)
            jr_inv = right_jacobian_inv_so3(r[3:])
            j_i = np.zeros((6, 6))
            j_i[:3, :3] = np.eye(3)
            j_i[3:, 3:] = jr_inv @ c.T
            j_xi = np.zeros((6, 6))
            j_xi[:3, :3] = dt * np.eye(3)
            j_xi[3:, 3:] = jr_inv @ right_jacobian_so3(twists[i, 3:] * dt) * dt
            j_n = np.zeros((6, 6))
            j_n[:3, :3] = -np.eye(3)
            j_n[3:, 3:] = -jr_inv.T
            blocks.append((r, [(i, 0, j_i), (i, 1, j_xi), (i + 1, 0, j_n)], w2))
            # Velocity smoothness.
            blocks.append(
                (twists[i] - twists[i + 1], [(i, 1, eye6), (i + 1, 1, -eye6)], w3)
            )
        return blocks

    def _cost(self, poses, twists) -> float:
        total = 0.0
        for r, _, w in self._blocks(poses, twists):
            total += float(r @ w @ r)
        return total

    def residuals_and_jacobian(self, poses, twists):
        """Dense stacked raw residual vector and its tangent-space Jacobian."""
        k = len(poses)
        blocks = self._blocks(poses, twists)
        n_res = 6 * len(blocks)
        jac = np.zeros((n_res, 12 * k))
        res = np.zeros(n_res)
        weights = []
        for b, (r, entries, w) in enumerate(blocks):
            res[6 * b : 6 * b + 6] = r
            for idx, kind, j in entries:
                col = 12 * idx + 6 * kind
                jac[6 * b : 6 * b + 6, col : col + 6] += j
            weights.append(w)
        return res, jac, weights

    @staticmethod
    def _retract(poses, twists, delta):
        new_poses = []
        new_twists = twists.copy()
        for i, pose in enumerate(poses):
            d = delta[12 * i : 12 * i + 12]
            new_poses.append(boxplus(pose, Twist(d[:3], d[3:6]), 1.0))
            new_twists[i] += d[6:12]
        return new_poses, new_twists

    # -- solver ------------------------------------------------------------

    def solve(self) -> TargetTrack:
        """Damped Gauss-Newton over the window; returns the full estimate.

        Non-convergence after ``max_iterations`` returns the best iterate
        with ``converged=False``.
        """
        if not self._measurements:
            raise NotInitializedError("no measurements buffered")
        poses, twists = self._initial_state()
        cost = self._cost(poses, twists)
        history = [cost]
        lam = 1e-10
        converged = False
        iterations = 0
        for iterations in range(1, self.cfg.max_iterations + 1):
            res, jac, weights = self.residuals_and_jacobian(poses, twists)
            n = jac.shape[1]
            h = np.zeros((n, n))
            g = np.zeros(n)
            for b, w in enumerate(weights):
                jb = jac[6 * b : 6 * b + 6]
                rb = res[6 * b : 6 * b + 6]
                wj = w @ jb
                h += jb.T @ wj
                g += jb.T @ (w @ rb)
            accepted = False
            for _ in range(30):
                try:
                    delta = np.linalg.solve(h + lam * np.eye(n), -g)
                except np.linalg.LinAlgError:
                    lam = max(lam * 100.0, 1e-8)
                    continue
                trial_poses, trial_twists = self._retract(poses, twists, delta)
                trial_cost = self._cost(trial_poses, trial_twists)
                if trial_cost <= cost:
                    poses, twists = trial_poses, trial_twists
                    lam = max(lam / 10.0, 1e-12)
                    accepted = True
                    break
                lam = min(lam * 100.0, 1e10)
            if not accepted:
                break
            history.append(trial_cost)
            if cost - trial_cost <= self.cfg.rel_tol * max(cost, 1e-300):
                cost = trial_cost
                converged = True
                break
            cost = trial_cost
        track = TargetTrack(
            poses=poses,
            twists=[Twist(t[:3], t[3:]) for t in twists],
            stamps=np.array(self._stamps),
            converged=converged,
            iterations=iterations,
            cost_history=history,
        )
        self._track = track
        return track

    def latest(self) -> tuple[Pose, Twist]:
        """Final window element: the state the planner consumes."""
        if self._track is None:
            raise NotInitializedError("solve() has not run")
        return self._track.poses[-1], self._track.twists[-1]
