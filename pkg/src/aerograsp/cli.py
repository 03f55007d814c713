"""Configuration-driven command line harness.

Subcommands: plan, simulate, smooth, register, fem, bounds, report.  Every
run reads a JSON config (validated, unknown keys rejected), writes CSV/JSON
artifacts atomically (temp file + rename) under --out, and prints a summary
JSON to stdout.  Exit codes: 0 success, 1 validation error, 2 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import fem as fem_mod
from .control import ControlGains, VehicleParams
from .geometry import Pose, exp_so3, log_so3
from .quadsim import (
    DisturbanceModel,
    GraspPlan,
    Scenario,
    SensorModel,
    SimulationDivergedError,
    TargetMotion,
    run_scenario,
)
from .registration import CorrespondenceSet, NoConsensusError, solve_tls
from .smoother import FixedLagSmoother, SmootherConfig
from .trajectory import BoundaryConditions, plan_min_snap, yaw_policy

__all__ = ["main", "entrypoint", "ConfigError"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


class NonConvergenceError(RuntimeError):
    pass


def _check_keys(section: dict, allowed, context: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"section '{context}' must be a JSON object")
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}' in {context}")


def _require(section: dict, key: str, context: str):
    if key not in section:
        raise ConfigError(f"missing key '{key}' in {context}")
    return section[key]


def _vec3(value, key: str):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ConfigError(f"key '{key}' must be a 3-vector")
    return arr


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, data: dict) -> None:
    _write_atomic(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def _fmt(value: float) -> str:
    return format(value, ".17g")


# -- subcommand: plan ---------------------------------------------------------


def _cmd_plan(config: dict, seed: int, out: Path) -> tuple[dict, int]:
    _check_keys(config, {"boundary_conditions", "sample_rate_hz", "target_position", "seed"}, "plan config")
    bc_cfg = _require(config, "boundary_conditions", "plan config")
    _check_keys(bc_cfg, {"x0", "xg", "vg", "xf", "tg", "tf"}, "boundary_conditions")
    try:
        bc = BoundaryConditions(
            x0=_vec3(_require(bc_cfg, "x0", "boundary_conditions"), "x0"),
            xg=_vec3(_require(bc_cfg, "xg", "boundary_conditions"), "xg"),
            vg=_vec3(_require(bc_cfg, "vg", "boundary_conditions"), "vg"),
            xf=_vec3(_require(bc_cfg, "xf", "boundary_conditions"), "xf"),
            tg=float(_require(bc_cfg, "tg", "boundary_conditions")),
            tf=float(_require(bc_cfg, "tf", "boundary_conditions")),
        )
    except ValueError as exc:
        raise ConfigError(f"boundary_conditions: {exc}") from exc
    rate = float(config.get("sample_rate_hz", 100.0))
    target = _vec3(config.get("target_position", bc.xg), "target_position")

    start = time.perf_counter()
    traj = plan_min_snap(bc)
    runtime = time.perf_counter() - start

    residuals = {
        "p0": float(np.max(np.abs(traj.position(0.0) - bc.x0))),
        "v0": float(np.max(np.abs(traj.velocity(0.0)))),
        "a0": float(np.max(np.abs(traj.acceleration(0.0)))),
        "pg": float(np.max(np.abs(traj.position(bc.tg) - bc.xg))),
        "vg": float(np.max(np.abs(traj.velocity(bc.tg) - bc.vg))),
        "ag": float(np.max(np.abs(traj.acceleration(bc.tg)))),
        "pf": float(np.max(np.abs(traj.position(bc.tf) - bc.xf))),
        "vf": float(np.max(np.abs(traj.velocity(bc.tf)))),
        "af": float(np.max(np.abs(traj.acceleration(bc.tf)))),
    }
    n = int(round(bc.tf * rate)) + 1
    lines = ["t,px,py,pz,vx,vy,vz,ax,ay,az,yaw"]
    frozen = 0.0
    for i in range(n):
        t = i / rate
        pos = traj.position(t)
        vel = traj.velocity(t)
        acc = traj.acceleration(t)
        yaw = yaw_policy(pos, target, t, bc.tg, frozen)
        if t < bc.tg:
            frozen = yaw
        lines.append(",".join(_fmt(v) for v in (t, *pos, *vel, *acc, yaw)))
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / "trajectory.csv"
    _write_atomic(trace_path, "\n".join(lines) + "\n")
    summary = {
        "constraint_residuals": residuals,
        "max_constraint_residual": max(residuals.values()),
        "snap_cost": traj.snap_cost(),
        "runtime_s": runtime,
        "trace_file": trace_path.name,
    }
    _write_json(out / "summary.json", summary)
    return summary, 0


# -- subcommand: simulate -----------------------------------------------------

_SCENARIO_KEYS = {
    "seed", "target", "plan", "disturbance", "sensors", "vehicle", "gains",
    "rates", "target_feed", "post_grasp_impulse", "impulse_duration",
}


def _build_scenario(cfg: dict, seed: int, context: str = "scenario") -> Scenario:
    _check_keys(cfg, _SCENARIO_KEYS, context)
    try:
        target_cfg = cfg.get("target", {})
        _check_keys(
            target_cfg,
            {"kind", "position", "yaw", "velocity", "center", "radius", "angular_rate"},
            f"{context}.target",
        )
        target = TargetMotion(
            kind=target_cfg.get("kind", "static"),
            position=np.asarray(target_cfg.get("position", [0.0, 0.0, 0.0]), dtype=float),
            yaw=float(target_cfg.get("yaw", 0.0)),
            velocity=np.asarray(target_cfg.get("velocity", [0.0, 0.0, 0.0]), dtype=float),
            center=np.asarray(target_cfg.get("center", [0.0, 0.0, 0.0]), dtype=float),
            radius=float(target_cfg.get("radius", 0.5)),
            angular_rate=float(target_cfg.get("angular_rate", 0.0)),
        )
        plan_cfg = cfg.get("plan", {})
        _check_keys(
            plan_cfg,
            {"start_offset", "grasp_offset", "terminal_offset", "relative_speed", "tg", "tf"},
            f"{context}.plan",
        )
        plan = GraspPlan(**plan_cfg)
        dist_cfg = cfg.get("disturbance", {})
        _check_keys(
            dist_cfg,
            {
                "constant_force", "grasp_mass", "thrust_efficiency_post_grasp",
                "ground_effect_gain", "ground_effect_height", "wind_noise_std",
            },
            f"{context}.disturbance",
        )
        disturbance = DisturbanceModel(**dist_cfg)
        sensors_cfg = dict(cfg.get("sensors", {}))
        _check_keys(
            sensors_cfg,
            {"pose_noise_std", "vio_drift_rate", "use_smoother", "smoother"},
            f"{context}.sensors",
        )
        smoother_cfg = sensors_cfg.pop("smoother", None)
        if smoother_cfg is not None:
            smoother_cfg = _build_smoother_config(smoother_cfg, f"{context}.sensors.smoother")
        sensors = SensorModel(smoother=smoother_cfg, **sensors_cfg)
        vehicle_cfg = dict(cfg.get("vehicle", {}))
        _check_keys(vehicle_cfg, {"mass", "inertia", "gravity", "f_max"}, f"{context}.vehicle")
        if "inertia" in vehicle_cfg:
            inertia = np.asarray(vehicle_cfg["inertia"], dtype=float)
            if inertia.shape == (3,):
                inertia = np.diag(inertia)
            vehicle_cfg["inertia"] = inertia
        params = VehicleParams(**vehicle_cfg)
        gains_cfg = cfg.get("gains", {})
        _check_keys(
            gains_cfg,
            {"kp", "kv", "kr", "komega", "gamma_f", "k_af", "theta_max"},
            f"{context}.gains",
        )
        gains = ControlGains(**gains_cfg)
        rates = cfg.get("rates", {})
        _check_keys(rates, {"physics_hz", "control_hz", "setpoint_hz", "record_hz"}, f"{context}.rates")
        scenario_seed = cfg.get("seed", seed)
        if scenario_seed is None:
            raise ConfigError(f"'{context}.seed' is mandatory (or pass --seed)")
        return Scenario(
            seed=int(scenario_seed),
            target=target,
            plan=plan,
            disturbance=disturbance,
            sensors=sensors,
            params=params,
            gains=gains,
            physics_hz=int(rates.get("physics_hz", 1000)),
            control_hz=int(rates.get("control_hz", 500)),
            setpoint_hz=int(rates.get("setpoint_hz", 100)),
            record_hz=int(rates.get("record_hz", 100)),
            target_feed=cfg.get("target_feed"),
            post_grasp_impulse=np.asarray(cfg.get("post_grasp_impulse", [0.0, 0.0, 0.0]), dtype=float),
            impulse_duration=float(cfg.get("impulse_duration", 0.0)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _cmd_simulate(config: dict, seed: int, out: Path) -> tuple[dict, int]:
    _check_keys(config, {"scenario", "template", "speeds"}, "simulate config")
    runs = []
    if "scenario" in config:
        if "template" in config or "speeds" in config:
            raise ConfigError("use either 'scenario' or 'template'+'speeds' in simulate config")
        runs.append(("scenario", _build_scenario(config["scenario"], seed)))
    else:
        template = _require(config, "template", "simulate config")
        speeds = _require(config, "speeds", "simulate config")
        for speed in speeds:
            cfg = json.loads(json.dumps(template))
            cfg.setdefault("plan", {})["relative_speed"] = float(speed)
            runs.append((f"speed_{speed}", _build_scenario(cfg, seed)))
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"runs": {}}
    start = time.perf_counter()
    for name, scenario in runs:
        trace = run_scenario(scenario)
        trace_path = out / f"trace_{name}.csv"
        trace.to_csv(trace_path)
        run_summary = trace.summary()
        run_summary["trace_file"] = trace_path.name
        run_summary["seed"] = scenario.seed
        summary["runs"][name] = run_summary
    summary["wall_time_s"] = time.perf_counter() - start
    _write_json(out / "summary.json", summary)
    return summary, 0


# -- subcommand: smooth -------------------------------------------------------


def _build_smoother_config(cfg: dict, context: str) -> SmootherConfig:
    allowed = {
        "window", "dt", "t1", "t2", "t3", "t4", "r1", "r2", "r3", "r4",
        "sigma_d", "rotate_measurement_noise", "max_iterations", "rel_tol",
    }
    _check_keys(cfg, allowed, context)
    kwargs = dict(cfg)
    if "sigma_d" in kwargs:
        sigma = np.asarray(kwargs["sigma_d"], dtype=float)
        if sigma.ndim == 0:
            sigma = float(sigma) * np.eye(6)
        elif sigma.shape == (6,):
            sigma = np.diag(sigma)
        elif sigma.shape != (6, 6):
            raise ConfigError(f"'{context}.sigma_d' must be scalar, 6-vector, or 6x6")
        kwargs["sigma_d"] = sigma
    try:
        return SmootherConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _cmd_smooth(config: dict, seed: int, out: Path) -> tuple[dict, int]:
    _check_keys(config, {"smoother", "measurements"}, "smooth config")
    cfg = _build_smoother_config(config.get("smoother", {}), "smoother")
    measurements = _require(config, "measurements", "smooth config")
    if not isinstance(measurements, list) or not measurements:
        raise ConfigError("'measurements' must be a non-empty list")
    smoother = FixedLagSmoother(cfg)
    parsed = []
    for i, m in enumerate(measurements):
        _check_keys(m, {"stamp", "position", "rotvec"}, f"measurements[{i}]")
        stamp = float(_require(m, "stamp", f"measurements[{i}]"))
        position = _vec3(_require(m, "position", f"measurements[{i}]"), "position")
        rotvec = _vec3(m.get("rotvec", [0.0, 0.0, 0.0]), "rotvec")
        pose = Pose(exp_so3(rotvec), position)
        parsed.append((stamp, pose))
        smoother.push(pose, stamp)
    track = smoother.solve()
    kept = parsed[-len(track.poses):]
    lines = [
        "stamp,meas_px,meas_py,meas_pz,meas_rx,meas_ry,meas_rz,"
        "est_px,est_py,est_pz,est_rx,est_ry,est_rz,"
        "twist_vx,twist_vy,twist_vz,twist_wx,twist_wy,twist_wz"
    ]
    for (stamp, meas), pose, twist in zip(kept, track.poses, track.twists):
        vals = (
            stamp,
            *meas.translation, *log_so3(meas.rotation),
            *pose.translation, *log_so3(pose.rotation),
            *twist.linear, *twist.angular,
        )
        lines.append(",".join(_fmt(v) for v in vals))
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / "smoothed.csv"
    _write_atomic(trace_path, "\n".join(lines) + "\n")
    pose_last, twist_last = smoother.latest()
    summary = {
        "converged": bool(track.converged),
        "iterations": int(track.iterations),
        "final_cost": float(track.cost_history[-1]),
        "latest_position": [float(v) for v in pose_last.translation],
        "latest_twist": [float(v) for v in twist_last.as_vector()],
        "trace_file": trace_path.name,
    }
    _write_json(out / "summary.json", summary)
    if not track.converged:
        raise NonConvergenceError("smoother did not converge within max_iterations")
    return summary, 0


# -- subcommand: register -----------------------------------------------------


def _cmd_register(config: dict, seed: int, out: Path, c_bar_flag=None) -> tuple[dict, int]:
    _check_keys(config, {"correspondences", "c_bar", "seed"}, "register config")
    pairs_cfg = _require(config, "correspondences", "register config")
    _check_keys(pairs_cfg, {"model_points", "observed_points"}, "correspondences")
    try:
        pairs = CorrespondenceSet(
            model_points=np.asarray(_require(pairs_cfg, "model_points", "correspondences"), dtype=float),
            observed_points=np.asarray(_require(pairs_cfg, "observed_points", "correspondences"), dtype=float),
        )
    except ValueError as exc:
        raise ConfigError(f"correspondences: {exc}") from exc
    c_bar = float(c_bar_flag if c_bar_flag is not None else config.get("c_bar", 0.010))
    start = time.perf_counter()
    result = solve_tls(pairs, c_bar=c_bar, seed=int(config.get("seed", seed)))
    runtime = time.perf_counter() - start
    summary = {
        "rotation": result.rotation.tolist(),
        "translation": result.translation.tolist(),
        "inlier_mask": [bool(b) for b in result.inlier_mask],
        "inlier_count": int(result.inlier_mask.sum()),
        "residuals": result.residuals.tolist(),
        "cost": result.cost,
        "converged": bool(result.converged),
        "c_bar": c_bar,
        "runtime_s": runtime,
    }
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "registration.json", summary)
    return summary, 0


# -- subcommand: fem ----------------------------------------------------------


def _parse_anchor(cfg: dict, context: str) -> fem_mod.BarycentricAnchor:
    _check_keys(cfg, {"element", "weights"}, context)
    try:
        return fem_mod.BarycentricAnchor(
            element=int(_require(cfg, "element", context)),
            weights=np.asarray(_require(cfg, "weights", context), dtype=float),
        )
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _cmd_fem(config: dict, seed: int, out: Path) -> tuple[dict, int]:
    _check_keys(config, {"mesh", "finger", "controls", "optimize"}, "fem config")
    if ("mesh" in config) == ("finger" in config):
        raise ConfigError("fem config needs exactly one of 'mesh' or 'finger'")
    if "mesh" in config:
        try:
            mesh, cables = fem_mod.mesh_from_dict(config["mesh"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"mesh: {exc}") from exc
    else:
        finger_cfg = config["finger"]
        _check_keys(
            finger_cfg,
            {"arc_radius", "span_deg", "width", "segments", "thickness", "cable_stiffness"},
            "finger",
        )
        try:
            mesh, cable = fem_mod.make_finger_mesh(**finger_cfg)
        except ValueError as exc:
            raise ConfigError(f"finger: {exc}") from exc
        cables = [cable]
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"n_nodes": mesh.n_nodes, "n_cables": len(cables)}
    if "optimize" in config:
        opt_cfg = config["optimize"]
        _check_keys(
            opt_cfg,
            {
                "target_point", "anchor1", "anchor2", "fov_planes", "eps",
                "weight_grasp", "weight_fov", "u_max", "u_init",
            },
            "optimize",
        )
        planes = []
        for i, p in enumerate(opt_cfg.get("fov_planes", [])):
            _check_keys(p, {"point", "normal"}, f"optimize.fov_planes[{i}]")
            try:
                planes.append(
                    fem_mod.FovPlane(
                        point=_vec3(_require(p, "point", "fov_planes"), "point"),
                        normal=_vec3(_require(p, "normal", "fov_planes"), "normal"),
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"optimize.fov_planes[{i}]: {exc}") from exc
        try:
            cfg = fem_mod.GraspObjectiveConfig(
                target_point=_vec3(_require(opt_cfg, "target_point", "optimize"), "target_point"),
                anchor1=_parse_anchor(_require(opt_cfg, "anchor1", "optimize"), "optimize.anchor1"),
                anchor2=_parse_anchor(_require(opt_cfg, "anchor2", "optimize"), "optimize.anchor2"),
                fov_planes=planes,
                eps=float(opt_cfg.get("eps", 0.005)),
                weight_grasp=float(opt_cfg.get("weight_grasp", 1.0)),
                weight_fov=float(opt_cfg.get("weight_fov", 1.0)),
            )
        except ValueError as exc:
            raise ConfigError(f"optimize: {exc}") from exc
        u_init = np.asarray(opt_cfg.get("u_init", np.zeros(len(cables))), dtype=float)
        u_max = opt_cfg.get("u_max", [c.rest_length for c in cables])
        result = fem_mod.optimize_control(mesh, cables, cfg, u_init, u_max)
        _write_json(
            out / "control_optimum.json",
            {
                "u": result.u.tolist(),
                "objective": result.objective,
                "converged": bool(result.converged),
                "history": [float(h) for h in result.history],
            },
        )
        _write_atomic(
            out / "equilibrium.csv",
            "x,y\n" + "\n".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in result.x) + "\n",
        )
        summary.update(
            {
                "u_star": result.u.tolist(),
                "objective": result.objective,
                "converged": bool(result.converged),
            }
        )
        _write_json(out / "summary.json", summary)
        if not result.converged:
            raise NonConvergenceError("gripper control optimization did not converge")
        return summary, 0
    controls = np.asarray(config.get("controls", np.zeros(len(cables))), dtype=float)
    eq = fem_mod.static_equilibrium(mesh, cables, controls)
    _write_atomic(
        out / "equilibrium.csv",
        "x,y\n" + "\n".join(f"{_fmt(p[0])},{_fmt(p[1])}" for p in eq.x) + "\n",
    )
    _write_json(out / "equilibrium.json", {"nodes": eq.x.tolist(), "residual": eq.residual})
    summary.update(
        {
            "converged": bool(eq.converged),
            "residual": eq.residual,
            "iterations": eq.iterations,
        }
    )
    _write_json(out / "summary.json", summary)
    if not eq.converged:
        raise NonConvergenceError("static equilibrium did not converge")
    return summary, 0


# -- subcommand: bounds and report --------------------------------------------


def _parse_gripper(cfg: dict) -> bounds_mod.GripperDims:
    _check_keys(cfg, {"delta1", "delta2", "delta3"}, "gripper")
    try:
        return bounds_mod.GripperDims(**cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"gripper: {exc}") from exc


def _parse_target_dims(cfg: dict) -> bounds_mod.TargetDims:
    _check_keys(cfg, {"ell1", "ell2", "mass"}, "target")
    try:
        return bounds_mod.TargetDims(**cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"target: {exc}") from exc


def _cmd_bounds(config: dict, seed: int, out: Path) -> tuple[dict, int]:
    _check_keys(config, {"gripper", "target", "budget"}, "bounds config")
    gripper = _parse_gripper(config.get("gripper", {}))
    target = _parse_target_dims(_require(config, "target", "bounds config"))
    bound_set = bounds_mod.error_bounds(gripper, target)
    summary = {
        "bounds": {
            "longitudinal": bound_set.longitudinal,
            "lateral": bound_set.lateral,
            "vertical": bound_set.vertical,
        },
        "feasible": bound_set.feasible,
    }
    out.mkdir(parents=True, exist_ok=True)
    if "budget" in config:
        budget_cfg = config["budget"]
        _check_keys(budget_cfg, {"pose_estimate", "vio_drift", "tracking"}, "budget")
        budget = bounds_mod.ErrorBudget(
            pose_estimate=_vec3(budget_cfg.get("pose_estimate", [0, 0, 0]), "pose_estimate"),
            vio_drift=_vec3(budget_cfg.get("vio_drift", [0, 0, 0]), "vio_drift"),
            tracking=_vec3(budget_cfg.get("tracking", [0, 0, 0]), "tracking"),
        )
        report = bounds_mod.classify(budget, bound_set)
        summary["classification"] = report.as_dict()
        _write_atomic(out / "report.txt", bounds_mod.format_report(report) + "\n")
    _write_json(out / "summary.json", summary)
    return summary, 0


def _cmd_report(config: dict, seed: int, out: Path) -> tuple[dict, int]:
    _check_keys(config, {"summary_file", "run", "gripper", "target"}, "report config")
    summary_file = Path(_require(config, "summary_file", "report config"))
    if not summary_file.exists():
        raise ConfigError(f"summary_file '{summary_file}' does not exist")
    with open(summary_file, encoding="utf-8") as fh:
        sim_summary = json.load(fh)
    runs = sim_summary.get("runs", {})
    run_name = config.get("run")
    if run_name is None:
        if len(runs) != 1:
            raise ConfigError("'run' key required when the summary holds multiple runs")
        run_name = next(iter(runs))
    if run_name not in runs:
        raise ConfigError(f"run '{run_name}' not present in summary_file")
    grasp = runs[run_name].get("grasp_event")
    if not grasp:
        raise ConfigError(f"run '{run_name}' contains no grasp event")
    gripper = _parse_gripper(config.get("gripper", {}))
    target = _parse_target_dims(_require(config, "target", "report config"))
    bound_set = bounds_mod.error_bounds(gripper, target)
    axes = ("longitudinal", "lateral", "vertical")
    budget = bounds_mod.ErrorBudget(
        pose_estimate=[grasp["pose_estimate_error"][a] for a in axes],
        vio_drift=[grasp["vio_drift"][a] for a in axes],
        tracking=[grasp["position_error"][a] for a in axes],
    )
    report = bounds_mod.classify(budget, bound_set)
    summary = {
        "run": run_name,
        "grasp_time": grasp["t"],
        "bounds": {
            "longitudinal": bound_set.longitudinal,
            "lateral": bound_set.lateral,
            "vertical": bound_set.vertical,
        },
        "classification": report.as_dict(),
    }
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / "report.txt", bounds_mod.format_report(report) + "\n")
    _write_json(out / "summary.json", summary)
    return summary, 0


# -- driver -------------------------------------------------------------------

_HANDLERS = {
    "plan": _cmd_plan,
    "simulate": _cmd_simulate,
    "smooth": _cmd_smooth,
    "register": _cmd_register,
    "fem": _cmd_fem,
    "bounds": _cmd_bounds,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aerograsp",
        description="Aerial grasping planner/estimator/controller/gripper harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--out", default="out", help="output directory")
        if name == "register":
            p.add_argument("--cbar", type=float, default=None, help="inlier residual bound (m)")
    args = parser.parse_args(argv)

    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file '{args.config}' not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file '{args.config}' is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise ConfigError("top-level config must be a JSON object")
        seed = args.seed if args.seed is not None else config.get("seed", 0)
        out = Path(args.out)
        if args.command == "register":
            summary, code = _cmd_register(config, int(seed), out, c_bar_flag=args.cbar)
        else:
            summary, code = _HANDLERS[args.command](config, int(seed), out)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc)}))
        return 1
    except NonConvergenceError as exc:
        print(json.dumps({"error": str(exc)}))
        return 2
    except (SimulationDivergedError, NoConsensusError) as exc:
        print(json.dumps({"error": str(exc)}))
        return 2
    print(json.dumps(summary, indent=2, sort_keys=True))
    return code


def entrypoint() -> None:
    sys.exit(main())
