from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from imuguard.constants import AlignmentMode
from imuguard.core.quaternion import matrices_from_quaternions, quaternions_from_matrices
from imuguard.core.state import Trajectory
from imuguard.evaluation.alignment import align, umeyama
from imuguard.evaluation.association import associate
from imuguard.evaluation.metrics import ate_rmse, evaluate
from imuguard.exceptions import ConfigurationError, RankDeficiencyError
from imuguard.sim.trajectory import GroundTruth


def _transformed(traj: Trajectory, R: np.ndarray, t: np.ndarray, scale: float = 1.0) -> Trajectory:
    q = quaternions_from_matrices(R @ matrices_from_quaternions(traj.q))
    return Trajectory(t=traj.t.copy(), p=scale * traj.p @ R.T + t, q=q)


@pytest.fixture(scope="module")
def reference(small_truth: GroundTruth) -> Trajectory:
    traj = small_truth.trajectory
    return Trajectory(t=traj.t[::10], p=traj.p[::10], q=traj.q[::10])


def test_umeyama_recovers_a_similarity() -> None:
    rng = np.random.default_rng(0)
    source = rng.normal(size=(50, 3))
    R = Rotation.random(random_state=1).as_matrix()
    t = np.array([1.0, -2.0, 3.0])
    R_hat, t_hat, s_hat = umeyama(source, 2.5 * source @ R.T + t, with_scale=True)
    assert np.allclose(R_hat, R, atol=1e-9)
    assert np.allclose(t_hat, t, atol=1e-9)
    assert s_hat == pytest.approx(2.5)
    _, _, s_rigid = umeyama(source, source @ R.T + t, with_scale=False)
    assert s_rigid == 1.0


def test_umeyama_rank_deficiency() -> None:
    line = np.column_stack([np.arange(10.0), np.zeros(10), np.zeros(10)])
    with pytest.raises(RankDeficiencyError):
        umeyama(line, line, with_scale=False)
    with pytest.raises(RankDeficiencyError):
        umeyama(line[:2], line[:2], with_scale=False)


def test_errors_are_invariant_to_rigid_transforms(reference: Trajectory) -> None:
    """ATE after se3 alignment and relative errors do not depend on the estimate's frame."""
    rng = np.random.default_rng(42)
    for k in range(100):
        R = Rotation.random(random_state=k).as_matrix()
        t = rng.uniform(-100.0, 100.0, size=3)
        report = evaluate(_transformed(reference, R, t), reference, alignment=AlignmentMode.SE3, lengths=[7.0, 14.0])
        assert report.ate_rmse < 1e-6
        assert all(r.translation_mean < 1e-6 for r in report.relative)
        assert all(r.yaw_mean_deg < 1e-4 for r in report.relative)


def test_sim3_removes_scale(reference: Trajectory) -> None:
    R = Rotation.from_euler("z", 40, degrees=True).as_matrix()
    est = _transformed(reference, R, np.array([3.0, 1.0, 0.0]), scale=0.5)
    pairs = associate(est, reference)
    transform = align(pairs, "sim3")
    assert transform.scale == pytest.approx(2.0)
    assert ate_rmse(pairs, transform) < 1e-6
    assert ate_rmse(pairs, align(pairs, "se3")) > 0.1


def test_posyaw_removes_heading_and_offset(reference: Trajectory) -> None:
    R = Rotation.from_euler("z", -75, degrees=True).as_matrix()
    pairs = associate(_transformed(reference, R, np.array([5.0, -5.0, 2.0])), reference)
    transform = align(pairs, AlignmentMode.POSYAW)
    assert ate_rmse(pairs, transform) < 1e-6
    assert ate_rmse(pairs, align(pairs, AlignmentMode.NONE)) > 1.0


def test_unknown_mode(reference: Trajectory) -> None:
    with pytest.raises(ConfigurationError):
        align(associate(reference, reference), "affine")
