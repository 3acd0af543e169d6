from __future__ import annotations

import numpy as np
import pytest

from imuguard.constants import TrajectoryShape
from imuguard.exceptions import ConfigurationError
from imuguard.sim.trajectory import GroundTruth, TrajectorySpec, generate_truth


def test_ellipse_sampling(small_truth: GroundTruth) -> None:
    """Poses are evenly spaced at pose_count / duration and start on the x semi-axis."""
    traj = small_truth.trajectory
    assert len(small_truth) == 1000
    assert small_truth.rate == 200.0
    assert np.allclose(np.diff(traj.t), 0.005)
    assert traj.p[0] == pytest.approx([8.0, 0.0, 0.0])
    assert np.allclose(np.linalg.norm(traj.q, axis=1), 1.0)
    assert small_truth.acc_world.shape == (1000, 3)
    assert small_truth.gyro_body.shape == (1000, 3)


@pytest.mark.parametrize("shape", list(TrajectoryShape))
def test_derivatives_are_consistent(shape: TrajectoryShape) -> None:
    """Closed-form velocity and acceleration match finite differences of the path."""
    truth = generate_truth(TrajectorySpec(shape=shape, pose_count=2000, duration=10.0))
    traj = truth.trajectory
    dt = traj.t[1] - traj.t[0]
    v_fd = (traj.p[2:] - traj.p[:-2]) / (2 * dt)
    a_fd = (traj.v[2:] - traj.v[:-2]) / (2 * dt)
    assert np.allclose(v_fd, traj.v[1:-1], atol=1e-3)
    assert np.allclose(a_fd, truth.acc_world[1:-1], atol=1e-3)


def test_line_is_level() -> None:
    """The line shape moves along x without rotating."""
    truth = generate_truth(TrajectorySpec(shape="line", speed=2.0, pose_count=100, duration=1.0))
    traj = truth.trajectory
    assert np.allclose(traj.p[:, 0], 2.0 * traj.t)
    assert np.allclose(truth.gyro_body, 0.0)
    assert np.allclose(traj.q, [1.0, 0.0, 0.0, 0.0])
    assert truth.initial_state().v.tolist() == [2.0, 0.0, 0.0]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"shape": "spiral"},
        {"duration": 0.0},
        {"pose_count": 1},
        {"imu_rate": -1.0},
        {"rx": 0.0},
        {"shape": "line", "speed": 0.0},
        {"angular_rate": float("nan")},
    ],
)
def test_spec_validation(kwargs: dict) -> None:
    with pytest.raises(ConfigurationError):
        TrajectorySpec(**kwargs)
