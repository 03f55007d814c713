"""Closed-form geometric grasp-error bounds and error-budget classification.

For a gripper with effective longitudinal length delta1, interior lateral
length delta2, and rear-to-front vertical span delta3, a target of length
ell1 x ell2 tolerates at most

    longitudinal: (delta1 - ell1) / 2
    lateral:      (ell2 - delta2) / 2
    vertical:     delta3 / 2

of placement error while all four fingers can still make contact.  The
lateral formula is kept as printed, so targets narrower than the interior
span yield a negative (infeasible-margin) bound, which is surfaced rather
than reinterpreted.

Classification sums per-axis error magnitudes worst-case; on the
longitudinal axis the verdict uses the effective total (pose estimate plus
VIO drift only), because grasp-closure timing depends on the believed
position rather than the setpoint, so longitudinal tracking error does not
move the trigger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AXES = ("longitudinal", "lateral", "vertical")

__all__ = [
    "GripperDims",
    "TargetDims",
    "ErrorBudget",
    "BoundSet",
    "AxisVerdict",
    "ClassifyReport",
    "error_bounds",
    "classify",
    "format_report",
]


@dataclass
class GripperDims:
    delta1: float = 0.234  # effective longitudinal length, m
    delta2: float = 0.098  # interior lateral length, m
    delta3: float = 0.152  # vertical rear-to-front span, m

    def __post_init__(self):
        if min(self.delta1, self.delta2, self.delta3) <= 0:
            raise ValueError("gripper dimensions must be positive")


@dataclass
class TargetDims:
    ell1: float  # longitudinal length, m
    ell2: float  # lateral length, m
    mass: float | None = None

    def __post_init__(self):
        if self.ell1 <= 0 or self.ell2 <= 0:
            raise ValueError("target dimensions must be positive")
        if self.mass is not None and self.mass <= 0:
            raise ValueError("target mass must be positive when given")


@dataclass
class ErrorBudget:
    """Per-axis error sources ordered (longitudinal, lateral, vertical).

    Signed values are accepted; worst-case totals use magnitudes.
    """

    pose_estimate: np.ndarray
    vio_drift: np.ndarray
    tracking: np.ndarray

    def __post_init__(self):
        self.pose_estimate = np.asarray(self.pose_estimate, dtype=float).reshape(3)
        self.vio_drift = np.asarray(self.vio_drift, dtype=float).reshape(3)
        self.tracking = np.asarray(self.tracking, dtype=float).reshape(3)


@dataclass
class BoundSet:
    longitudinal: float
    lateral: float
    vertical: float
    feasible: dict

    def as_array(self) -> np.ndarray:
        return np.array([self.longitudinal, self.lateral, self.vertical])


def error_bounds(gripper: GripperDims, target: TargetDims) -> BoundSet:
    """Maximum tolerable per-axis placement error for four-finger contact."""
    lon = (gripper.delta1 - target.ell1) / 2.0
    lat = (target.ell2 - gripper.delta2) / 2.0
    ver = gripper.delta3 / 2.0
    return BoundSet(
        longitudinal=lon,
        lateral=lat,
        vertical=ver,
        feasible={"longitudinal": lon >= 0, "lateral": lat >= 0, "vertical": ver >= 0},
    )


@dataclass
class AxisVerdict:
    axis: str
    pose_estimate: float
    vio_drift: float
    tracking: float
    total: float
    effective_total: float | None
    bound: float
    within: bool


@dataclass
class ClassifyReport:
    verdicts: list

    def as_dict(self) -> dict:
        return {
            v.axis: {
                "pose_estimate": v.pose_estimate,
                "vio_drift": v.vio_drift,
                "tracking": v.tracking,
                "total": v.total,
                "effective_total": v.effective_total,
                "bound": v.bound,
                "within": v.within,
            }
            for v in self.verdicts
        }


def classify(budget: ErrorBudget, bounds: BoundSet) -> ClassifyReport:
    """Worst-case per-axis totals against the bounds.

    Longitudinal verdicts compare the effective total (pose + VIO) against
    the bound; lateral and vertical use the full three-source total.
    """
    bound_values = bounds.as_array()
    verdicts = []
    for i, axis in enumerate(AXES):
        pose = abs(float(budget.pose_estimate[i]))
        drift = abs(float(budget.vio_drift[i]))
        track = abs(float(budget.tracking[i]))
        total = pose + drift + track
        effective = pose + drift if axis == "longitudinal" else None
        decisive = effective if effective is not None else total
        verdicts.append(
            AxisVerdict(
                axis=axis,
                pose_estimate=pose,
                vio_drift=drift,
                tracking=track,
                total=total,
                effective_total=effective,
                bound=float(bound_values[i]),
                within=decisive <= bound_values[i],
            )
        )
    return ClassifyReport(verdicts)


def format_report(report: ClassifyReport) -> str:
    """Plain-text table with the same column roles as the error tables."""
    header = (
        f"{'axis':<13}{'pose est':>10}{'vio':>10}{'tracking':>10}"
        f"{'total':>10}{'effective':>11}{'bound':>10}{'verdict':>9}"
    )
    lines = [header, "-" * len(header)]
    for v in report.verdicts:
        eff = f"{v.effective_total:.4f}" if v.effective_total is not None else "-"
        lines.append(
            f"{v.axis:<13}{v.pose_estimate:>10.4f}{v.vio_drift:>10.4f}"
            f"{v.tracking:>10.4f}{v.total:>10.4f}{eff:>11}{v.bound:>10.4f}"
            f"{'within' if v.within else 'outside':>9}"
        )
    return "\n".join(lines)
