from __future__ import annotations

import numpy as np
import pytest

from imuguard.core.quaternion import Quaternion
from imuguard.core.state import ImuBias, ImuSample, ImuStream, NavState, NoiseSpec, Trajectory, WorldModel
from imuguard.exceptions import (
    ConfigurationError,
    DataError,
    InvalidRotationError,
    OrderingError,
    ResamplingError,
    ShapeError,
)


def _stream(n: int = 5, gyro: bool = True) -> ImuStream:
    t = np.arange(n) * 0.01
    acc = np.arange(3 * n, dtype=float).reshape(n, 3)
    return ImuStream(t=t, acc=acc, gyro=-acc if gyro else None)


def test_stream_rejects_non_increasing_time() -> None:
    """Duplicate timestamps are an ordering error."""
    with pytest.raises(OrderingError):
        ImuStream(t=[0.0, 0.01, 0.01], acc=np.zeros((3, 3)))


def test_stream_rejects_mismatched_rows() -> None:
    """Every timestamp needs one accelerometer row."""
    with pytest.raises(ShapeError):
        ImuStream(t=[0.0, 0.01], acc=np.zeros((3, 3)))


def test_stream_rejects_non_finite_values() -> None:
    """NaN readings are refused."""
    acc = np.zeros((2, 3))
    acc[1, 2] = np.nan
    with pytest.raises(DataError):
        ImuStream(t=[0.0, 0.01], acc=acc)


def test_stream_indexing_and_slicing() -> None:
    """Integers give samples, slices give streams."""
    stream = _stream()
    sample = stream[2]
    assert isinstance(sample, ImuSample)
    assert sample.t == pytest.approx(0.02)
    assert np.array_equal(sample.acc, [6.0, 7.0, 8.0])

    part = stream[1:3]
    assert isinstance(part, ImuStream)
    assert len(part) == 2
    assert np.array_equal(part.gyro, -stream.acc[1:3])


def test_stream_from_samples_round_trip() -> None:
    """Samples rebuild the same columns."""
    stream = _stream()
    rebuilt = ImuStream.from_samples(list(stream))
    assert np.array_equal(rebuilt.t, stream.t)
    assert np.array_equal(rebuilt.acc, stream.acc)
    assert np.array_equal(rebuilt.gyro, stream.gyro)


def test_from_samples_mixed_gyro() -> None:
    """Samples either all carry gyro data or none do."""
    samples = [ImuSample(0.0, np.zeros(3), np.zeros(3)), ImuSample(0.01, np.zeros(3))]
    with pytest.raises(ShapeError):
        ImuStream.from_samples(samples)


def test_channels_layout() -> None:
    """Six-channel series append the weighted gyroscope."""
    stream = _stream()
    six = stream.channels(6, gyro_weight=2.0)
    assert six.shape == (5, 6)
    assert np.array_equal(six[:, 3:], -2.0 * stream.acc)
    assert np.array_equal(stream.channels(3), stream.acc)
    with pytest.raises(ShapeError):
        _stream(gyro=False).channels(6)
    with pytest.raises(ConfigurationError):
        stream.channels(4)


def test_nominal_period_is_median() -> None:
    """One late sample does not move the nominal period."""
    stream = ImuStream(t=[0.0, 0.01, 0.02, 0.05, 0.06], acc=np.zeros((5, 3)))
    assert stream.nominal_period() == pytest.approx(0.01)


def test_replace_keeps_timestamps() -> None:
    """Replacing channels leaves the original untouched."""
    stream = _stream()
    changed = stream.replace(acc=np.zeros((5, 3)))
    assert np.array_equal(changed.t, stream.t)
    assert not np.array_equal(changed.acc, stream.acc)
    assert np.array_equal(changed.gyro, stream.gyro)


def test_world_model_gravity_range() -> None:
    """Implausible gravity needs an explicit opt-in."""
    with pytest.raises(ConfigurationError):
        WorldModel(gravity=np.array([0.0, 0.0, 1.62]))
    assert WorldModel(gravity=np.array([0.0, 0.0, 1.62]), allow_any_gravity=True).gravity_norm == pytest.approx(1.62)


def test_noise_spec_rejects_negative_sigma() -> None:
    """Noise levels are standard deviations."""
    with pytest.raises(ConfigurationError):
        NoiseSpec(acc_sigma=-0.1)


def test_nav_state_requires_unit_quaternion() -> None:
    """States only hold valid orientations."""
    with pytest.raises(InvalidRotationError):
        NavState(t=0.0, p=np.zeros(3), v=np.zeros(3), q=Quaternion(1.0, 1.0, 0.0, 0.0))
    with pytest.raises(ShapeError):
        NavState(t=0.0, p=np.zeros(2), v=np.zeros(3), q=Quaternion.identity())


def test_bias_defaults_to_zero() -> None:
    """A default bias changes nothing."""
    bias = ImuBias.zero()
    assert np.array_equal(bias.acc, np.zeros(3))
    assert np.array_equal(bias.gyro, np.zeros(3))


def _trajectory() -> Trajectory:
    t = np.array([0.0, 1.0, 2.0])
    p = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])
    q = np.stack([Quaternion.from_axis_angle([0, 0, 1], a).as_array() for a in (0.0, 0.5, 1.0)])
    return Trajectory(t=t, p=p, q=q)


def test_trajectory_pose_at_interpolates() -> None:
    """Between samples positions are linear and orientations slerped."""
    traj = _trajectory()
    p, q = traj.pose_at(0.5)
    assert np.allclose(p, [0.5, 0.0, 0.0])
    assert q.yaw == pytest.approx(0.25)

    p, q = traj.pose_at(2.0)
    assert np.allclose(p, [1.0, 1.0, 0.0])
    assert q.yaw == pytest.approx(1.0)


def test_trajectory_pose_at_outside_span() -> None:
    """Extrapolation is refused."""
    with pytest.raises(ResamplingError):
        _trajectory().pose_at(2.5)


def test_trajectory_path_length_and_subset() -> None:
    """Path length sums the segment lengths."""
    traj = _trajectory()
    assert traj.path_length() == pytest.approx(2.0)
    assert len(traj.subset(np.array([0, 2]))) == 2


def test_trajectory_requires_unit_quaternions() -> None:
    """Unnormalised quaternions need the explicit constructor."""
    q = np.tile([2.0, 0.0, 0.0, 0.0], (2, 1))
    with pytest.raises(InvalidRotationError):
        Trajectory(t=[0.0, 1.0], p=np.zeros((2, 3)), q=q)
    traj = Trajectory.from_unnormalized(np.array([0.0, 1.0]), np.zeros((2, 3)), q)
    assert np.allclose(traj.q, [[1.0, 0.0, 0.0, 0.0]] * 2)


def test_trajectory_states_round_trip() -> None:
    """States rebuild the same trajectory."""
    traj = _trajectory()
    rebuilt = Trajectory.from_states(traj.states())
    assert np.allclose(rebuilt.p, traj.p)
    assert np.allclose(rebuilt.q, traj.q)
    assert np.allclose(rebuilt.v, 0.0)
