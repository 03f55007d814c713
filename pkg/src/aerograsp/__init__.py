"""Aerial grasping stack: planning, estimation, control, and soft-gripper FEM.

Modules
-------
geometry      SO(3)/SE(3) maps and the split pose retraction
trajectory    minimum-snap boundary-value planning and moving-frame transforms
smoother      fixed-lag target pose/velocity estimation
registration  robust truncated-least-squares keypoint registration
control       adaptive geometric SE(3) tracking controller
quadsim       rigid-body quadrotor simulator and scenario library
fem           tendon-driven soft finger FEM and control optimization
bounds        geometric grasp-error bounds and error-budget classification
cli           configuration-driven command line harness
"""

from .bounds import ErrorBudget, GripperDims, TargetDims, classify, error_bounds
from .control import (
    ControlGains,
    ControllerState,
    VehicleParams,
    VehicleState,
    Wrench,
    compute_wrench,
    desired_rotation,
)
from .fem import (
    Cable,
    FingerMesh,
    GraspObjectiveConfig,
    Material,
    energy,
    make_finger_mesh,
    optimize_control,
    sensitivity,
    static_equilibrium,
)
from .geometry import Pose, Twist, boxminus, boxplus, exp_so3, hat, log_so3, vee
from .quadsim import DisturbanceModel, GraspPlan, Scenario, SensorModel, TargetMotion, run_scenario, step
from .registration import CorrespondenceSet, compose_global, horn_align, solve_tls
from .smoother import FixedLagSmoother, SmootherConfig, TargetTrack, weight_matrices
from .trajectory import (
    BoundaryConditions,
    FrameState,
    PolynomialTrajectory,
    Setpoint,
    plan_min_snap,
    to_fixed_frame,
    yaw_policy,
)

__version__ = "0.1.0"
