"""Robust rigid registration of corresponded 3D keypoints.

Estimates the pose aligning observed camera-frame keypoints to CAD-frame
model keypoints under outliers by minimizing the truncated least squares
cost sum_i min(||b_i - R a_i - t||^2, c_bar^2).  The solver is a
multi-start alternating minimizer: minimal 3-subsets seed closed-form Horn
alignments that are refined by reclassify-and-realign until the inlier set
is a fixed point; the best truncated cost wins, with deterministic
tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import Pose, compose, exp_so3

DEFAULT_C_BAR = 0.010  # m, inlier residual bound

__all__ = [
    "DegenerateCorrespondencesError",
    "NoConsensusError",
    "CorrespondenceSet",
    "RegistrationResult",
    "horn_align",
    "truncated_cost",
    "solve_tls",
    "compose_global",
    "camera_extrinsic",
]


class DegenerateCorrespondencesError(ValueError):
    """Fewer than 3 usable pairs, or a collinear configuration."""


class NoConsensusError(RuntimeError):
    """No pose with at least 3 mutually consistent points was found."""


@dataclass
class CorrespondenceSet:
    """Paired CAD-frame (model) and camera-frame (observed) keypoints."""

    model_points: np.ndarray  # b_i, (N, 3)
    observed_points: np.ndarray  # a_i, (N, 3)

    def __post_init__(self):
        self.model_points = np.asarray(self.model_points, dtype=float).reshape(-1, 3)
        self.observed_points = np.asarray(self.observed_points, dtype=float).reshape(-1, 3)
        if len(self.model_points) != len(self.observed_points):
            raise ValueError("model and observed point counts differ")
        if len(self.model_points) < 3:
            raise ValueError("at least 3 correspondences required")
        if not (
            np.all(np.isfinite(self.model_points))
            and np.all(np.isfinite(self.observed_points))
        ):
            raise ValueError("correspondences contain non-finite entries")

    def __len__(self) -> int:
        return len(self.model_points)


@dataclass
class RegistrationResult:
    rotation: np.ndarray
    translation: np.ndarray
    inlier_mask: np.ndarray
    residuals: np.ndarray
    converged: bool
    cost: float


def horn_align(pairs: CorrespondenceSet, mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form least-squares alignment over masked-in pairs.

    Returns (R, t) minimizing sum ||b_i - R a_i - t||^2 via centroid
    subtraction and SVD of the cross-covariance with determinant correction.
    """
    b = pairs.model_points
    a = pairs.observed_points
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        b = b[mask]
        a = a[mask]
    if len(b) < 3:
        raise DegenerateCorrespondencesError("need >= 3 unmasked pairs")
    cb = b.mean(axis=0)
    ca = a.mean(axis=0)
    m = (a - ca).T @ (b - cb)
    u, s, vt = np.linalg.svd(m)
    if s[1] <= 1e-12 * max(s[0], 1e-300):
        raise DegenerateCorrespondencesError("collinear correspondence configuration")
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = cb - rot @ ca
    return rot, t


def _residuals(pairs: CorrespondenceSet, rot, t) -> np.ndarray:
    return np.linalg.norm(pairs.model_points - pairs.observed_points @ rot.T - t, axis=1)


def truncated_cost(pairs: CorrespondenceSet, rot, t, c_bar: float) -> tuple[float, np.ndarray]:
    res = _residuals(pairs, rot, t)
    return float(np.sum(np.minimum(res**2, c_bar**2))), res


def _refine(pairs, rot, t, c_bar, seen):
    """Alternate reclassify/realign to an inlier-set fixed point.

    Returns (cost, mask, rot, t, residuals) or None if the consensus dies.
    The truncated cost is non-increasing across iterations by construction;
    a guard raises if numerics ever break that.
    """
    cost, res = truncated_cost(pairs, rot, t, c_bar)
    prev_mask = None
    for _ in range(100):
        mask = res <= c_bar
        if mask.sum() < 3:
            return None
        key = mask.tobytes()
        if key in seen:
            return seen[key]
        if prev_mask is not None and np.array_equal(mask, prev_mask):
            result = (cost, mask, rot, t, res)
            seen[key] = result
            return result
        try:
            rot, t = horn_align(pairs, mask)
        except DegenerateCorrespondencesError:
            return None
        new_cost, res = truncated_cost(pairs, rot, t, c_bar)
        if new_cost > cost + 1e-9 * max(1.0, cost):
            raise RuntimeError("truncated cost increased during alternation")
        cost = new_cost
        prev_mask = mask
    result = (cost, mask, rot, t, res)
    seen[mask.tobytes()] = result
    return result


def _better(a, b):
    """Candidate order: cost, then inlier count (desc), then smallest mask."""
    tie = 1e-12 * max(1.0, a[0], b[0])
    if a[0] < b[0] - tie:
        return a
    if b[0] < a[0] - tie:
        return b
    na, nb = int(a[1].sum()), int(b[1].sum())
    if na != nb:
        return a if na > nb else b
    return a if tuple(a[1].astype(int)) <= tuple(b[1].astype(int)) else b


def solve_tls(
    pairs: CorrespondenceSet,
    c_bar: float = DEFAULT_C_BAR,
    seed: int = 0,
    num_random_subsets: int = 200,
    exhaustive_limit: int = 12,
) -> RegistrationResult:
    """Truncated least-squares registration by multi-start alternation.

    All 3-subsets are used as starts when N <= exhaustive_limit, otherwise
    ``num_random_subsets`` seeded random 3-subsets; the all-inlier Horn
    solution is always included, so the returned cost never exceeds it.
    Deterministic under a fixed seed.
    """
    if c_bar <= 0:
        raise ValueError("c_bar must be positive")
    n = len(pairs)
    if n <= exhaustive_limit:
        subsets = list(combinations(range(n), 3))
    else:
        rng = np.random.default_rng(seed)
        subsets = [tuple(sorted(rng.choice(n, size=3, replace=False))) for _ in range(num_random_subsets)]
    starts = []
    try:
        starts.append(horn_align(pairs, np.ones(n, dtype=bool)))
    except DegenerateCorrespondencesError:
        pass
    for subset in subsets:
        mask = np.zeros(n, dtype=bool)
        mask[list(subset)] = True
        try:
            starts.append(horn_align(pairs, mask))
        except DegenerateCorrespondencesError:
            continue
    best = None
    seen: dict[bytes, tuple] = {}
    for rot, t in starts:
        candidate = _refine(pairs, rot, t, c_bar, seen)
        if candidate is None:
            continue
        best = candidate if best is None else _better(best, candidate)
    if best is None:
        raise NoConsensusError("no pose with >= 3 mutually consistent points")
    cost, mask, rot, t, res = best
    return RegistrationResult(
        rotation=rot,
        translation=t,
        inlier_mask=mask.copy(),
        residuals=res.copy(),
        converged=True,
        cost=cost,
    )


def camera_extrinsic(pitch_down_deg: float = 35.0, offset=(0.0, 0.0, 0.0)) -> Pose:
    """Body-to-camera mount: pitched down about body y, optional lever arm."""
    angle = np.deg2rad(pitch_down_deg)
    return Pose(exp_so3(np.array([0.0, angle, 0.0])), np.asarray(offset, dtype=float))


def compose_global(camera_relative: Pose, drone_pose: Pose, extrinsic: Pose | None = None) -> Pose:
    """Global target pose: drone pose o camera extrinsic o camera-relative."""
    if extrinsic is None:
        extrinsic = camera_extrinsic()
    return compose(compose(drone_pose, extrinsic), camera_relative)
