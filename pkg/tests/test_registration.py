from itertools import combinations

import numpy as np
import pytest

from aerograsp.geometry import Pose, exp_so3
from aerograsp.registration import (
    CorrespondenceSet,
    DegenerateCorrespondencesError,
    NoConsensusError,
    camera_extrinsic,
    compose_global,
    horn_align,
    solve_tls,
    truncated_cost,
)


def random_rigid(rng):
    rot = exp_so3(rng.normal(size=3))
    t = rng.normal(size=3) * 0.5
    return rot, t


def make_instance(rng, n_inliers, n_outliers, noise=0.0, outlier_scale=0.5):
    """Known-pose synthetic: observed points a, model points b = R a + t."""
    rot, t = random_rigid(rng)
    a = rng.uniform(-0.2, 0.2, size=(n_inliers + n_outliers, 3))
    b = a @ rot.T + t
    if noise > 0:
        b[:n_inliers] += rng.normal(0.0, noise, size=(n_inliers, 3))
    for i in range(n_inliers, n_inliers + n_outliers):
        direction = rng.normal(size=3)
        b[i] += outlier_scale * direction / np.linalg.norm(direction)
    mask_true = np.zeros(n_inliers + n_outliers, dtype=bool)
    mask_true[:n_inliers] = True
    return CorrespondenceSet(b, a), rot, t, mask_true


def exhaustive_oracle(pairs, c_bar):
    """Brute force over all inlier subsets of size >= 3: Horn on each,
    truncated cost over all points, minimum wins."""
    n = len(pairs)
    best = np.inf
    for size in range(3, n + 1):
        for subset in combinations(range(n), size):
            mask = np.zeros(n, dtype=bool)
            mask[list(subset)] = True
            try:
                rot, t = horn_align(pairs, mask)
            except DegenerateCorrespondencesError:
                continue
            cost, _ = truncated_cost(pairs, rot, t, c_bar)
            best = min(best, cost)
    return best


class TestHornAlign:
    def test_identity(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(6, 3))
        pairs = CorrespondenceSet(pts, pts)
        rot, t = horn_align(pairs)
        assert np.max(np.abs(rot - np.eye(3))) < 1e-12
        assert np.max(np.abs(t)) < 1e-12

    def test_quarter_turn_with_shift(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(8, 3))
        rot_true = exp_so3([0, 0, np.pi / 2])
        t_true = np.array([0.1, 0.0, 0.0])
        pairs = CorrespondenceSet(a @ rot_true.T + t_true, a)
        rot, t = horn_align(pairs)
        assert np.max(np.abs(rot - rot_true)) < 1e-10
        assert np.max(np.abs(t - t_true)) < 1e-10

    def test_noise_free_recovery_property(self):
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(1000):
            rot_true, t_true = random_rigid(rng)
            a = rng.normal(size=(5, 3))
            pairs = CorrespondenceSet(a @ rot_true.T + t_true, a)
            rot, t = horn_align(pairs)
            worst = max(worst, np.max(np.abs(rot - rot_true)), np.max(np.abs(t - t_true)))
        assert worst < 1e-9

    def test_global_ls_optimality_against_perturbations(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(10, 3))
        b = a @ exp_so3([0.2, -0.1, 0.4]).T + [0.1, 0.2, -0.1]
        b += rng.normal(0, 0.01, size=b.shape)
        pairs = CorrespondenceSet(b, a)
        rot, t = horn_align(pairs)
        base = np.sum((b - a @ rot.T - t) ** 2)
        for _ in range(200):
            d_rot = rot @ exp_so3(rng.normal(size=3) * 0.01)
            d_t = t + rng.normal(size=3) * 0.01
            assert np.sum((b - a @ d_rot.T - d_t) ** 2) >= base - 1e-12

    def test_collinear_degenerate(self):
        a = np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]])
        with pytest.raises(DegenerateCorrespondencesError):
            horn_align(CorrespondenceSet(a, a))

    def test_mask_too_small(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(5, 3))
        with pytest.raises(DegenerateCorrespondencesError):
            horn_align(CorrespondenceSet(pts, pts), mask=[True, True, False, False, False])


class TestSolveTls:
    def test_all_exact_inliers(self):
        rng = np.random.default_rng(5)
        pairs, rot, t, _ = make_instance(rng, 8, 0)
        result = solve_tls(pairs, c_bar=0.01, seed=0)
        assert result.inlier_mask.all()
        assert np.max(np.abs(result.rotation - rot)) < 1e-10
        assert result.cost < 1e-18

    def test_two_gross_outliers_identified(self):
        rng = np.random.default_rng(6)
        for seed in range(20):
            pairs, rot, t, mask_true = make_instance(rng, 8, 2)
            result = solve_tls(pairs, c_bar=0.01, seed=seed)
            assert np.array_equal(result.inlier_mask, mask_true)
            assert np.max(np.abs(result.rotation - rot)) < 1e-8
            assert np.max(np.abs(result.translation - t)) < 1e-8

    def test_matches_exhaustive_oracle_small_n(self):
        rng = np.random.default_rng(7)
        for n_in, n_out in ((8, 2), (6, 3), (5, 4), (7, 3), (10, 0)):
            pairs, *_ = make_instance(rng, n_in, n_out, noise=0.002)
            result = solve_tls(pairs, c_bar=0.01, seed=0)
            oracle = exhaustive_oracle(pairs, 0.01)
            assert result.cost <= oracle + 1e-9

    def test_cost_not_worse_than_all_inlier_horn(self):
        rng = np.random.default_rng(8)
        pairs, *_ = make_instance(rng, 7, 3)
        rot, t = horn_align(pairs, np.ones(len(pairs), dtype=bool))
        all_in_cost, _ = truncated_cost(pairs, rot, t, 0.01)
        result = solve_tls(pairs, c_bar=0.01, seed=0)
        assert result.cost <= all_in_cost + 1e-12

    def test_outlier_fraction_sweep(self):
        rng = np.random.default_rng(9)
        for n_out in (2, 4, 6):  # up to 6/14 = 43% outliers
            failures = 0
            for seed in range(100):
                pairs, rot, t, mask_true = make_instance(rng, 8, n_out)
                result = solve_tls(pairs, c_bar=0.01, seed=seed)
                ok = (
                    np.array_equal(result.inlier_mask, mask_true)
                    and np.max(np.abs(result.rotation - rot)) < 1e-6
                )
                failures += 0 if ok else 1
            assert failures == 0

    def test_rigid_motion_invariance(self):
        rng = np.random.default_rng(10)
        pairs, *_ = make_instance(rng, 7, 2)
        result = solve_tls(pairs, c_bar=0.01, seed=0)
        g_rot, g_t = random_rigid(rng)
        moved = CorrespondenceSet(
            pairs.model_points @ g_rot.T + g_t,
            pairs.observed_points @ g_rot.T + g_t,
        )
        moved_result = solve_tls(moved, c_bar=0.01, seed=0)
        assert np.array_equal(result.inlier_mask, moved_result.inlier_mask)
        conj_rot = g_rot @ result.rotation @ g_rot.T
        conj_t = g_rot @ result.translation + g_t - conj_rot @ g_t
        assert np.max(np.abs(moved_result.rotation - conj_rot)) < 1e-9
        assert np.max(np.abs(moved_result.translation - conj_t)) < 1e-9

    def test_no_consensus_error(self):
        # Pairwise-inconsistent correspondences: no 3 points agree.
        rng = np.random.default_rng(11)
        a = rng.normal(size=(6, 3))
        b = rng.normal(size=(6, 3)) * 5.0
        with pytest.raises(NoConsensusError):
            solve_tls(CorrespondenceSet(b, a), c_bar=1e-6, seed=0)

    def test_deterministic_at_large_n(self):
        rng = np.random.default_rng(12)
        pairs, *_ = make_instance(rng, 14, 6)
        r1 = solve_tls(pairs, c_bar=0.01, seed=3)
        r2 = solve_tls(pairs, c_bar=0.01, seed=3)
        assert np.array_equal(r1.inlier_mask, r2.inlier_mask)
        assert np.array_equal(r1.rotation, r2.rotation)

    def test_inlier_residuals_bounded(self):
        rng = np.random.default_rng(13)
        pairs, *_ = make_instance(rng, 8, 2, noise=0.003)
        result = solve_tls(pairs, c_bar=0.01, seed=0)
        assert np.all(result.residuals[result.inlier_mask] <= 0.01 + 1e-12)
        cost_check = np.sum(np.minimum(result.residuals**2, 0.01**2))
        assert abs(cost_check - result.cost) < 1e-15


class TestComposeGlobal:
    def test_identity_chain(self):
        rel = Pose(exp_so3([0.1, 0.2, 0.3]), [0.5, 0, 0.1])
        out = compose_global(rel, Pose.identity(), extrinsic=Pose.identity())
        assert np.allclose(out.rotation, rel.rotation)
        assert np.allclose(out.translation, rel.translation)

    def test_pure_translation_adds(self):
        rel = Pose(np.eye(3), [1.0, 2.0, 3.0])
        drone = Pose(np.eye(3), [0.1, 0.2, 0.3])
        out = compose_global(rel, drone, extrinsic=Pose.identity())
        assert np.allclose(out.translation, [1.1, 2.2, 3.3])

    def test_matches_homogeneous_matrix_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(50):
            rel = Pose(exp_so3(rng.normal(size=3)), rng.normal(size=3))
            drone = Pose(exp_so3(rng.normal(size=3)), rng.normal(size=3))
            ext = Pose(exp_so3(rng.normal(size=3)), rng.normal(size=3))
            out = compose_global(rel, drone, ext)
            expected = drone.matrix() @ ext.matrix() @ rel.matrix()
            assert np.max(np.abs(out.matrix() - expected)) < 1e-12

    def test_default_extrinsic_pitch(self):
        ext = camera_extrinsic()
        forward = ext.rotation @ np.array([1.0, 0.0, 0.0])
        # 35 degree pitch-down mount: forward axis dips below horizontal.
        assert abs(forward[2] + np.sin(np.deg2rad(35.0))) < 1e-12
