"""Deterministic rigid-body quadrotor simulator closing the grasp loop.

Integrates m*pdd = m*g + f_eff*bz + theta(t), Rd = R*What, J*Wd = -WxJW + tau
with RK4 on (p, v, W) and a geometric rotation update per physics substep.
``run_scenario`` wires planner, moving-frame setpoint transform, adaptive
controller, and integrator at fixed rates, fires the gripper-closure event
when the drone's believed position crosses the grasp plane (actual position
plus injected VIO drift, never the setpoint), and applies the grasped mass
and thrust-efficiency loss from that event onward.

Sensor realism is parametric and off by default: isotropic target pose
estimate noise at planning time, VIO drift proportional to displacement,
seeded white wind force, and a ground-effect thrust multiplier
1 + gain * max(0, 1 - z/h_ref).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import (
    ControlGains,
    ControllerState,
    VehicleParams,
    VehicleState,
    Wrench,
    compute_wrench,
)
from .geometry import Pose, exp_so3, hat
from .smoother import FixedLagSmoother, SmootherConfig
from .trajectory import (
    BoundaryConditions,
    FrameState,
    Setpoint,
    plan_min_snap,
    to_fixed_frame,
    yaw_policy,
)

__all__ = [
    "SimulationDivergedError",
    "DisturbanceModel",
    "TargetMotion",
    "GraspPlan",
    "SensorModel",
    "Scenario",
    "ScenarioTrace",
    "step",
    "run_scenario",
    "TRACE_COLUMNS",
]

TRACE_COLUMNS = (
    "t",
    "sp_px", "sp_py", "sp_pz",
    "sp_vx", "sp_vy", "sp_vz",
    "sp_ax", "sp_ay", "sp_az",
    "sp_yaw",
    "px", "py", "pz",
    "vx", "vy", "vz",
    "ep_lon", "ep_lat", "ep_ver",
    "ev_lon", "ev_lat", "ev_ver",
    "theta_x", "theta_y", "theta_z",
    "thrust", "tau_x", "tau_y", "tau_z",
    "event",
)


class SimulationDivergedError(RuntimeError):
    """State became non-finite; message carries the timestamp."""


@dataclass
class DisturbanceModel:
    constant_force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    grasp_mass: float = 0.0
    thrust_efficiency_post_grasp: float = 1.0
    ground_effect_gain: float = 0.0
    ground_effect_height: float = 1.0
    wind_noise_std: float = 0.0

    def __post_init__(self):
        self.constant_force = np.asarray(self.constant_force, dtype=float).reshape(3)
        if self.grasp_mass < 0:
            raise ValueError("grasp_mass must be >= 0")
        if not (0.0 < self.thrust_efficiency_post_grasp <= 1.0):
            raise ValueError("thrust_efficiency_post_grasp must be in (0, 1]")
        if self.ground_effect_gain < 0 or self.ground_effect_height <= 0:
            raise ValueError("ground effect parameters out of range")
        if self.wind_noise_std < 0:
            raise ValueError("wind_noise_std must be >= 0")


@dataclass
class TargetMotion:
    """Kinematic target: static, linear, or turntable circular motion."""

    kind: str = "static"
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    yaw: float = 0.0
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 0.5
    angular_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("static", "linear", "turntable"):
            raise ValueError(f"unknown target motion kind '{self.kind}'")
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        self.center = np.asarray(self.center, dtype=float).reshape(3)
        if self.kind == "turntable" and self.radius <= 0:
            raise ValueError("turntable radius must be positive")

    def _yaw_at(self, t: float) -> float:
        if self.kind == "turntable":
            # Grasp axis stays tangent to the circle.
            return self.yaw + self.angular_rate * t
        return self.yaw

    def frame_state(self, t: float) -> FrameState:
        if self.kind == "static":
            return FrameState(
                position=self.position,
                rotation=_rot_z(self.yaw),
            )
        if self.kind == "linear":
            return FrameState(
                position=self.position + self.velocity * t,
                velocity=self.velocity,
                rotation=_rot_z(self.yaw),
            )
        w = self.angular_rate
        phase = self.yaw + w * t - np.pi / 2.0
        radial = _rot_z(phase) @ np.array([self.radius, 0.0, 0.0])
        wvec = np.array([0.0, 0.0, w])
        return FrameState(
            position=self.center + radial,
            velocity=np.cross(wvec, radial),
            acceleration=np.cross(wvec, np.cross(wvec, radial)),
            rotation=_rot_z(self._yaw_at(t)),
            angular_velocity=wvec,
        )

    def pose(self, t: float) -> Pose:
        fs = self.frame_state(t)
        return Pose(fs.rotation, fs.position)


@dataclass
class GraspPlan:
    """Boundary-condition template expressed in the target frame.

    When ``tg``/``tf`` are omitted they are derived from the template
    geometry and the grasp speed (segment time = 2 * distance / speed,
    floored at 0.8 s), so faster grasps fly shorter, more demanding
    trajectories over the same approach.
    """

    start_offset: np.ndarray = field(default_factory=lambda: np.array([-2.0, 0.0, 0.6]))
    grasp_offset: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.12]))
    terminal_offset: np.ndarray = field(default_factory=lambda: np.array([1.6, 0.0, 0.6]))
    relative_speed: float = 0.5
    tg: float | None = None
    tf: float | None = None

    def __post_init__(self):
        self.start_offset = np.asarray(self.start_offset, dtype=float).reshape(3)
        self.grasp_offset = np.asarray(self.grasp_offset, dtype=float).reshape(3)
        self.terminal_offset = np.asarray(self.terminal_offset, dtype=float).reshape(3)
        if self.relative_speed < 0:
            raise ValueError("relative_speed must be >= 0")
        if self.start_offset[0] >= self.grasp_offset[0]:
            raise ValueError("start must lie before the grasp plane along the grasp axis")
        if self.tg is None:
            if self.relative_speed <= 0:
                raise ValueError("tg must be given explicitly when relative_speed is 0")
            d = float(np.linalg.norm(self.grasp_offset - self.start_offset))
            self.tg = max(0.8, 2.0 * d / self.relative_speed)
        if self.tf is None:
            if self.relative_speed <= 0:
                raise ValueError("tf must be given explicitly when relative_speed is 0")
            d = float(np.linalg.norm(self.terminal_offset - self.grasp_offset))
            self.tf = self.tg + max(0.8, 2.0 * d / self.relative_speed)
        self.tg = float(self.tg)
        self.tf = float(self.tf)
        if self.tg <= 0:
            raise ValueError("tg must be positive")

    def boundary_conditions(self) -> BoundaryConditions:
        return BoundaryConditions(
            x0=self.start_offset,
            xg=self.grasp_offset,
            vg=np.array([self.relative_speed, 0.0, 0.0]),
            xf=self.terminal_offset,
            tg=self.tg,
            tf=self.tf,
        )


@dataclass
class SensorModel:
    """Injected errors reproducing the error-budget decomposition."""

    pose_noise_std: float = 0.0
    vio_drift_rate: float = 0.0  # m of drift per m of displacement
    use_smoother: bool = False
    smoother: SmootherConfig | None = None

    def __post_init__(self):
        if self.pose_noise_std < 0 or self.vio_drift_rate < 0:
            raise ValueError("sensor error magnitudes must be >= 0")


@dataclass
class Scenario:
    seed: int
    target: TargetMotion = field(default_factory=TargetMotion)
    plan: GraspPlan = field(default_factory=GraspPlan)
    disturbance: DisturbanceModel = field(default_factory=DisturbanceModel)
    sensors: SensorModel = field(default_factory=SensorModel)
    params: VehicleParams = field(default_factory=VehicleParams)
    gains: ControlGains = field(default_factory=ControlGains)
    physics_hz: int = 1000
    control_hz: int = 500
    setpoint_hz: int = 100
    record_hz: int = 100
    target_feed: str | None = None  # "truth" | "frozen"; default per motion kind
    post_grasp_impulse: np.ndarray = field(default_factory=lambda: np.zeros(3))
    impulse_duration: float = 0.0

    def __post_init__(self):
        self.seed = int(self.seed)
        self.post_grasp_impulse = np.asarray(self.post_grasp_impulse, dtype=float).reshape(3)
        for num, den in (
            (self.physics_hz, self.control_hz),
            (self.physics_hz, self.setpoint_hz),
            (self.physics_hz, self.record_hz),
        ):
            if num % den != 0:
                raise ValueError("physics_hz must be a multiple of the other rates")
        if not (0 < 1.0 / self.physics_hz <= 0.01):
            raise ValueError("physics step must be in (0, 0.01] s")
        if self.target_feed is None:
            self.target_feed = "frozen" if self.target.kind == "static" else "truth"
        if self.target_feed not in ("truth", "frozen"):
            raise ValueError("target_feed must be 'truth' or 'frozen'")


def _rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def step(
    state: VehicleState,
    wrench: Wrench,
    params: VehicleParams,
    dist: DisturbanceModel,
    t: float,
    dt: float,
    grasped: bool = False,
    extra_force=None,
) -> VehicleState:
    """One RK4 physics step of the rigid-body dynamics.

    Rotation is propagated geometrically (R * exp(W dt) with the trapezoidal
    body-rate average), so R stays orthonormal to machine precision.
    """
    if not (0.0 < dt <= 0.01):
        raise ValueError("dt must be in (0, 0.01]")
    mass = params.mass + (dist.grasp_mass if grasped else 0.0)
    efficiency = dist.thrust_efficiency_post_grasp if grasped else 1.0
    theta = dist.constant_force.copy()
    if extra_force is not None:
        theta = theta + np.asarray(extra_force, dtype=float).reshape(3)
    j = params.inertia
    j_inv = np.linalg.inv(j)
    r0 = state.rotation
    w0 = state.body_rate
    tau = wrench.torque

    def accel(p, v, r_stage):
        f_eff = wrench.thrust * efficiency
        if dist.ground_effect_gain > 0.0:
            f_eff *= 1.0 + dist.ground_effect_gain * max(
                0.0, 1.0 - p[2] / dist.ground_effect_height
            )
        return params.gravity + (f_eff * r_stage[:, 2] + theta) / mass

    def w_dot(w):
        return j_inv @ (tau - np.cross(w, j @ w))

    # Attitude at RK4 stage times, frozen-rate geometric propagation.
    r_half = r0 @ exp_so3(w0 * (0.5 * dt))
    r_full = r0 @ exp_so3(w0 * dt)

    p0, v0 = state.position, state.velocity
    k1v = accel(p0, v0, r0)
    k1w = w_dot(w0)
    k2p = v0 + 0.5 * dt * k1v
    k2v = accel(p0 + 0.5 * dt * v0, k2p, r_half)
    k2w = w_dot(w0 + 0.5 * dt * k1w)
    k3p = v0 + 0.5 * dt * k2v
    k3v = accel(p0 + 0.5 * dt * k2p, k3p, r_half)
    k3w = w_dot(w0 + 0.5 * dt * k2w)
    k4p = v0 + dt * k3v
    k4v = accel(p0 + dt * k3p, k4p, r_full)
    k4w = w_dot(w0 + dt * k3w)

    p_new = p0 + dt / 6.0 * (v0 + 2.0 * k2p + 2.0 * k3p + k4p)
    v_new = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    w_new = w0 + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    r_new = r0 @ exp_so3(0.5 * (w0 + w_new) * dt)

    if not (
        np.all(np.isfinite(p_new))
        and np.all(np.isfinite(v_new))
        and np.all(np.isfinite(w_new))
    ):
        raise SimulationDivergedError(f"simulation diverged at t={t:.6f} s")
    return VehicleState(p_new, v_new, r_new, w_new)


def _grasp_axes(rotation: np.ndarray) -> np.ndarray:
    """Rows: longitudinal (grasp axis), lateral, vertical unit vectors."""
    lon = rotation @ np.array([1.0, 0.0, 0.0])
    ver = np.array([0.0, 0.0, 1.0])
    lat = np.cross(ver, lon)
    n = np.linalg.norm(lat)
    lat = np.array([0.0, 1.0, 0.0]) if n < 1e-9 else lat / n
    return np.vstack([lon, lat, ver])


@dataclass
class ScenarioTrace:
    """Fixed-rate time series plus grasp-event diagnostics."""

    t: np.ndarray
    sp_pos: np.ndarray
    sp_vel: np.ndarray
    sp_acc: np.ndarray
    sp_yaw: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    ep_axes: np.ndarray
    ev_axes: np.ndarray
    theta_hat: np.ndarray
    thrust: np.ndarray
    torque: np.ndarray
    event: list
    events: list
    grasp_time: float | None = None
    ep_at_grasp: np.ndarray | None = None
    ev_at_grasp: np.ndarray | None = None
    pose_error_axes: np.ndarray | None = None
    drift_axes: np.ndarray | None = None
    drift_vector: np.ndarray | None = None
    speed_at_grasp: float | None = None

    def to_csv(self, path) -> None:
        lines = [",".join(TRACE_COLUMNS)]
        for i in range(len(self.t)):
            vals = [
                self.t[i],
                *self.sp_pos[i], *self.sp_vel[i], *self.sp_acc[i], self.sp_yaw[i],
                *self.pos[i], *self.vel[i],
                *self.ep_axes[i], *self.ev_axes[i],
                *self.theta_hat[i],
                self.thrust[i], *self.torque[i],
            ]
            row = ",".join(format(v, ".17g") for v in vals)
            lines.append(row + "," + self.event[i])
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    def summary(self) -> dict:
        pre = self.grasp_time if self.grasp_time is not None else self.t[-1] + 1.0
        pre_mask = self.t < pre
        post_mask = ~pre_mask
        ep_norm = np.linalg.norm(self.ep_axes, axis=1)
        out = {
            "grasp_event": None,
            "tracking_rmse_pre_grasp": float(np.sqrt(np.mean(ep_norm[pre_mask] ** 2)))
            if pre_mask.any()
            else None,
            "tracking_rmse_post_grasp": float(np.sqrt(np.mean(ep_norm[post_mask] ** 2)))
            if post_mask.any()
            else None,
            "theta_hat_extrema": {
                "min": [float(x) for x in self.theta_hat.min(axis=0)],
                "max": [float(x) for x in self.theta_hat.max(axis=0)],
            },
        }
        if self.grasp_time is not None:
            axes = ("longitudinal", "lateral", "vertical")
            out["grasp_event"] = {
                "t": float(self.grasp_time),
                "position_error": {a: float(v) for a, v in zip(axes, self.ep_at_grasp)},
                "velocity_error": {a: float(v) for a, v in zip(axes, self.ev_at_grasp)},
                "pose_estimate_error": {a: float(v) for a, v in zip(axes, self.pose_error_axes)},
                "vio_drift": {a: float(v) for a, v in zip(axes, self.drift_axes)},
                "vio_drift_magnitude": float(np.linalg.norm(self.drift_vector)),
                "speed_at_grasp": float(self.speed_at_grasp),
            }
        return out


def run_scenario(sc: Scenario) -> ScenarioTrace:
    """Plan, fly, and record one grasp scenario; deterministic per seed."""
    rng = np.random.default_rng(sc.seed)
    dt_p = 1.0 / sc.physics_hz
    n_ctrl = sc.physics_hz // sc.control_hz
    n_sp = sc.physics_hz // sc.setpoint_hz
    n_rec = sc.physics_hz // sc.record_hz
    dt_ctrl = n_ctrl * dt_p

    true_fs0 = sc.target.frame_state(0.0)

    # Believed target state at planning time.
    pose_error_world = np.zeros(3)
    if sc.target_feed == "frozen":
        if sc.sensors.use_smoother:
            # Default observation-phase config: measurement weights at the
            # injected noise level and a tight velocity prior, matching the
            # static-target assumption of the vision experiments.
            cfg = sc.sensors.smoother or SmootherConfig(
                t1=max(sc.sensors.pose_noise_std**2, 1e-8),
                r1=1e-6,
                t2=1e-6,
                r2=1e-6,
                t3=1e-6,
                r3=1e-6,
                t4=1e-4,
                r4=1e-4,
            )
            smoother = FixedLagSmoother(cfg)
            for k in range(cfg.window):
                stamp = (k - cfg.window + 1) * cfg.dt
                fs = sc.target.frame_state(stamp)
                noisy = fs.position + rng.normal(0.0, sc.sensors.pose_noise_std, 3)
                smoother.push(Pose(fs.rotation, noisy), stamp)
            smoother.solve()
            believed_pose, _ = smoother.latest()
        else:
            noisy = true_fs0.position + rng.normal(0.0, sc.sensors.pose_noise_std, 3)
            believed_pose = Pose(true_fs0.rotation, noisy)
        pose_error_world = believed_pose.translation - true_fs0.position
        frozen_fs = FrameState(position=believed_pose.translation, rotation=believed_pose.rotation)

        def believed_frame(_t: float) -> FrameState:
            return frozen_fs
    else:

        def believed_frame(t: float) -> FrameState:
            return sc.target.frame_state(t)

    traj = plan_min_snap(sc.plan.boundary_conditions())
    tg, tf = sc.plan.tg, sc.plan.tf
    n_steps = int(round(tf * sc.physics_hz))

    fs0 = believed_frame(0.0)
    sp = to_fixed_frame(traj.setpoint(0.0), fs0)
    yaw0 = yaw_policy(sp.position, fs0.position, 0.0, tg, 0.0)
    sp.yaw = yaw0
    state = VehicleState(sp.position, sp.velocity, _rot_z(yaw0), np.zeros(3))
    ctrl = ControllerState()
    wrench = Wrench(0.0, np.zeros(3))

    drift = np.zeros(3)
    grasped = False
    frozen_yaw = yaw0
    zero3 = np.zeros(3)
    grasp_time = None
    ep_at_grasp = ev_at_grasp = drift_axes = pose_err_axes = None
    drift_vec_at_grasp = None
    speed_at_grasp = None
    events: list[tuple[float, str]] = []
    pending_event = ""

    rows_t, rows_sp_p, rows_sp_v, rows_sp_a, rows_sp_yaw = [], [], [], [], []
    rows_p, rows_v, rows_ep, rows_ev, rows_theta = [], [], [], [], []
    rows_f, rows_tau, rows_event = [], [], []

    def record(t: float):
        nonlocal pending_event
        fsb = believed_frame(t)
        axes = _grasp_axes(fsb.rotation)
        ep = axes @ (state.position - sp.position)
        ev = axes @ (state.velocity - sp.velocity)
        rows_t.append(t)
        rows_sp_p.append(sp.position.copy())
        rows_sp_v.append(sp.velocity.copy())
        rows_sp_a.append(sp.acceleration.copy())
        rows_sp_yaw.append(sp.yaw)
        rows_p.append(state.position.copy())
        rows_v.append(state.velocity.copy())
        rows_ep.append(ep)
        rows_ev.append(ev)
        rows_theta.append(ctrl.theta_hat.copy())
        rows_f.append(wrench.thrust)
        rows_tau.append(wrench.torque.copy())
        rows_event.append(pending_event)
        pending_event = ""

    for i in range(n_steps):
        t = i * dt_p
        if i % n_sp == 0:
            fsb = believed_frame(t)
            sp = to_fixed_frame(traj.setpoint(t), fsb)
            yaw = yaw_policy(state.position, fsb.position, t, tg, frozen_yaw)
            if t < tg:
                frozen_yaw = yaw
            sp.yaw = yaw
        if i % n_ctrl == 0:
            sp_ctrl = sp
            if (
                grasped
                and sc.impulse_duration > 0.0
                and t - grasp_time <= sc.impulse_duration
            ):
                sp_ctrl = Setpoint(
                    sp.position, sp.velocity, sp.acceleration + sc.post_grasp_impulse, sp.yaw
                )
            wrench, ctrl = compute_wrench(
                state, sp_ctrl, zero3, zero3, ctrl, sc.params, sc.gains, dt_ctrl
            )
        if i % n_rec == 0:
            record(t)
        wind = (
            rng.normal(0.0, sc.disturbance.wind_noise_std, 3)
            if sc.disturbance.wind_noise_std > 0.0
            else None
        )
        prev_pos = state.position
        state = step(state, wrench, sc.params, sc.disturbance, t, dt_p, grasped, wind)
        drift = drift + sc.sensors.vio_drift_rate * (state.position - prev_pos)
        if not grasped:
            t_new = t + dt_p
            fsb = believed_frame(t_new)
            grasp_point = fsb.position + fsb.rotation @ sc.plan.grasp_offset
            axes = _grasp_axes(fsb.rotation)
            believed_pos = state.position + drift
            if (believed_pos - grasp_point) @ axes[0] >= 0.0:
                grasped = True
                grasp_time = t_new
                events.append((t_new, "grasp"))
                pending_event = "grasp"
                sp_exact = to_fixed_frame(traj.setpoint(t_new), fsb)
                ep_at_grasp = axes @ (state.position - sp_exact.position)
                ev_at_grasp = axes @ (state.velocity - sp_exact.velocity)
                drift_axes = axes @ drift
                drift_vec_at_grasp = drift.copy()
                pose_err_axes = axes @ pose_error_world
                speed_at_grasp = float(np.linalg.norm(state.velocity))
    t_end = n_steps * dt_p
    fsb = believed_frame(t_end)
    sp = to_fixed_frame(traj.setpoint(t_end), fsb)
    sp.yaw = yaw_policy(state.position, fsb.position, t_end, tg, frozen_yaw)
    record(t_end)

    return ScenarioTrace(
        t=np.array(rows_t),
        sp_pos=np.array(rows_sp_p),
        sp_vel=np.array(rows_sp_v),
        sp_acc=np.array(rows_sp_a),
        sp_yaw=np.array(rows_sp_yaw),
        pos=np.array(rows_p),
        vel=np.array(rows_v),
        ep_axes=np.array(rows_ep),
        ev_axes=np.array(rows_ev),
        theta_hat=np.array(rows_theta),
        thrust=np.array(rows_f),
        torque=np.array(rows_tau),
        event=rows_event,
        events=events,
        grasp_time=grasp_time,
        ep_at_grasp=ep_at_grasp,
        ev_at_grasp=ev_at_grasp,
        pose_error_axes=pose_err_axes,
        drift_axes=drift_axes,
        drift_vector=drift_vec_at_grasp,
        speed_at_grasp=speed_at_grasp,
    )
