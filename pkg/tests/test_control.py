import numpy as np
import pytest

from aerograsp.control import (
    ControlGains,
    ControllerState,
    DegenerateAttitudeError,
    VehicleParams,
    VehicleState,
    compute_wrench,
    desired_rotation,
)
from aerograsp.geometry import exp_so3, vee
from aerograsp.quadsim import DisturbanceModel, step
from aerograsp.trajectory import Setpoint


def rot_z(angle):
    return exp_so3([0.0, 0.0, angle])


def hover_setpoint(p=(0, 0, 1)):
    return Setpoint(p, [0, 0, 0], [0, 0, 0], 0.0)


def run_hover_loop(gains, disturbance_force, seconds, params=None):
    params = params or VehicleParams()
    dist = DisturbanceModel(constant_force=disturbance_force)
    sp = hover_setpoint()
    state = VehicleState([0, 0, 1], [0, 0, 0], np.eye(3), [0, 0, 0])
    ctrl = ControllerState()
    wrench = None
    zero = np.zeros(3)
    n = int(seconds * 1000)
    for i in range(n):
        if i % 2 == 0:
            wrench, ctrl = compute_wrench(state, sp, zero, zero, ctrl, params, gains, 2e-3)
        state = step(state, wrench, params, dist, i * 1e-3, 1e-3)
    return state, ctrl


class TestDesiredRotation:
    def test_hover_command_identity(self):
        m = VehicleParams().mass
        assert np.allclose(desired_rotation([0, 0, m * 9.81], 0.0), np.eye(3), atol=1e-12)

    def test_hover_command_quarter_yaw(self):
        m = VehicleParams().mass
        assert np.allclose(desired_rotation([0, 0, m * 9.81], np.pi / 2), rot_z(np.pi / 2), atol=1e-12)

    def test_orthonormal_and_antiparallel(self):
        # Physical regime: commanded force expression with negative z
        # (gravity-dominated), so no sign flip occurs.
        rng = np.random.default_rng(0)
        for _ in range(300):
            a = rng.normal(size=3) * 5.0
            a[2] = -abs(a[2]) - 1.0
            r = desired_rotation(a, rng.uniform(-np.pi, np.pi))
            assert np.max(np.abs(r.T @ r - np.eye(3))) < 1e-9
            assert abs(np.linalg.det(r) - 1.0) < 1e-9
            assert np.max(np.abs(r[:, 2] + a / np.linalg.norm(a))) < 1e-9

    def test_zero_command_degenerate(self):
        with pytest.raises(DegenerateAttitudeError):
            desired_rotation([0, 0, 1e-9], 0.0)

    def test_heading_parallel_degenerate(self):
        # Thrust axis along +x, heading also +x.
        with pytest.raises(DegenerateAttitudeError):
            desired_rotation([-5.0, 0, -1e-12], 0.0)


class TestComputeWrench:
    def test_perfect_hover_equilibrium(self):
        params, gains = VehicleParams(), ControlGains()
        state = VehicleState([0, 0, 1], [0, 0, 0], np.eye(3), [0, 0, 0])
        wrench, ctrl = compute_wrench(
            state, hover_setpoint(), np.zeros(3), np.zeros(3), ControllerState(), params, gains, 2e-3
        )
        assert abs(wrench.thrust - params.mass * 9.81) < 1e-12
        assert np.max(np.abs(wrench.torque)) < 1e-12
        assert np.max(np.abs(ctrl.theta_hat)) < 1e-15

    def test_thrust_clamped_to_f_max(self):
        params = VehicleParams(f_max=10.0)
        state = VehicleState([0, 0, -5], [0, 0, -5], np.eye(3), [0, 0, 0])
        wrench, _ = compute_wrench(
            state, hover_setpoint(), np.zeros(3), np.zeros(3), ControllerState(),
            params, ControlGains(), 2e-3,
        )
        assert wrench.thrust == 10.0

    def test_projection_keeps_theta_in_ball(self):
        rng = np.random.default_rng(1)
        params, gains = VehicleParams(), ControlGains(theta_max=2.0)
        ctrl = ControllerState()
        for _ in range(200):
            state = VehicleState(
                rng.normal(size=3) * 5, rng.normal(size=3) * 5, np.eye(3), rng.normal(size=3)
            )
            _, ctrl = compute_wrench(
                state, hover_setpoint(), np.zeros(3), np.zeros(3), ctrl, params, gains, 0.01
            )
            assert np.linalg.norm(ctrl.theta_hat) <= 2.0 + 1e-12

    def test_rotation_error_skewness(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            r = exp_so3(rng.normal(size=3))
            rd = exp_so3(rng.normal(size=3))
            m = 0.5 * (rd.T @ r - r.T @ rd)
            assert np.max(np.abs(m + m.T)) < 1e-12

    def test_gravity_cancellation_at_zero_errors(self):
        # f * R e3 + m g = m a_d when the state sits exactly on the setpoint.
        rng = np.random.default_rng(3)
        params, gains = VehicleParams(), ControlGains()
        for _ in range(50):
            acc = rng.normal(size=3) * 2.0
            yaw = rng.uniform(-np.pi, np.pi)
            a_cmd = params.mass * params.gravity - params.mass * acc
            r = desired_rotation(a_cmd, yaw)
            pos = rng.normal(size=3)
            vel = rng.normal(size=3)
            state = VehicleState(pos, vel, r, [0, 0, 0])
            sp = Setpoint(pos, vel, acc, yaw)
            wrench, _ = compute_wrench(
                state, sp, np.zeros(3), np.zeros(3), ControllerState(), params, gains, 1e-3
            )
            achieved = wrench.thrust * r[:, 2] + params.mass * params.gravity
            assert np.max(np.abs(achieved - params.mass * acc)) < 1e-9

    def test_thrust_invariant_under_world_yaw(self):
        rng = np.random.default_rng(4)
        params, gains = VehicleParams(), ControlGains()
        for _ in range(50):
            psi = rng.uniform(-np.pi, np.pi)
            rz = rot_z(psi)
            pos, vel = rng.normal(size=3), rng.normal(size=3)
            r = exp_so3(rng.normal(size=3) * 0.3)
            omega = rng.normal(size=3)
            yaw = rng.uniform(-1, 1)
            sp_pos, sp_vel, sp_acc = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
            theta = rng.normal(size=3) * 0.5

            state_a = VehicleState(pos, vel, r, omega)
            sp_a = Setpoint(sp_pos, sp_vel, sp_acc, yaw)
            wrench_a, _ = compute_wrench(
                state_a, sp_a, np.zeros(3), np.zeros(3), ControllerState(theta), params, gains, 1e-3
            )
            state_b = VehicleState(rz @ pos, rz @ vel, rz @ r, omega)
            sp_b = Setpoint(rz @ sp_pos, rz @ sp_vel, rz @ sp_acc, yaw + psi)
            wrench_b, _ = compute_wrench(
                state_b, sp_b, np.zeros(3), np.zeros(3), ControllerState(rz @ theta), params, gains, 1e-3
            )
            assert abs(wrench_a.thrust - wrench_b.thrust) < 1e-9

    def test_gain_validation(self):
        with pytest.raises(ValueError):
            ControlGains(kp=0.0)
        with pytest.raises(ValueError):
            ControlGains(theta_max=-1.0)


class TestClosedLoopAdaptation:
    def test_medkit_weight_convergence(self):
        # 148 g payload weight as a constant force; estimate converges and
        # hover error vanishes (full 10 s run lives in the acceptance suite).
        theta_true = np.array([0.0, 0.0, -0.148 * 9.81])
        state, ctrl = run_hover_loop(ControlGains(), theta_true, seconds=6.0)
        assert np.linalg.norm(state.position - [0, 0, 1]) < 1e-3
        assert np.linalg.norm(ctrl.theta_hat - theta_true) < 0.02 * np.linalg.norm(theta_true)

    def test_zero_adaptation_steady_state_offset(self):
        # With the adaptation frozen, the z-offset equals the force-balance
        # value theta_z / kp (displacement along the disturbance).
        gains = ControlGains(gamma_f=1e-12)
        theta_true = np.array([0.0, 0.0, -0.148 * 9.81])
        state, _ = run_hover_loop(gains, theta_true, seconds=8.0)
        expected = theta_true[2] / gains.kp
        assert abs((state.position[2] - 1.0) - expected) < 0.01 * abs(expected)

    def test_lateral_disturbance_rejected(self):
        # Lateral rejection goes through the attitude loop, so it settles
        # more slowly than the vertical axis.
        theta_true = np.array([0.4, -0.3, 0.0])
        state, ctrl = run_hover_loop(ControlGains(), theta_true, seconds=12.0)
        assert np.linalg.norm(state.position - [0, 0, 1]) < 2e-3
        assert np.linalg.norm(ctrl.theta_hat - theta_true) < 0.03
