from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from imuguard.constants import TrajectoryShape
from imuguard.core.quaternion import euler_zyx_to_quaternions
from imuguard.core.state import NavState, Trajectory
from imuguard.exceptions import ConfigurationError


@dataclass(frozen=True)
class TrajectorySpec:
    """Analytic path and its sampling.

    Attributes:
        shape: ellipse3d (ellipse in x-y with z = z_amplitude sin(2 w t)),
            line (constant velocity along x) or figure_eight.
        rx: Semi-axis along x in metres.
        ry: Semi-axis along y in metres.
        z_amplitude: Vertical oscillation amplitude in metres.
        angular_rate: Loop rate w in rad/s.
        duration: Seconds covered by the poses.
        pose_count: Number of poses, spaced duration / pose_count apart.
        imu_rate: Default IMU rate in Hz used when synthesizing measurements.
        roll_amplitude: Roll oscillation amplitude in radians (curved shapes).
        pitch_amplitude: Pitch oscillation amplitude in radians (curved shapes).
        speed: Speed of the line shape in m/s.
    """

    shape: TrajectoryShape = TrajectoryShape.ELLIPSE3D
    rx: float = 8.0
    ry: float = 5.0
    z_amplitude: float = 1.0
    angular_rate: float = 2.0 * np.pi / 10.0
    duration: float = 10.0
    pose_count: int = 2000
    imu_rate: float = 200.0
    roll_amplitude: float = 0.05
    pitch_amplitude: float = 0.05
    speed: float = 1.0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "shape", TrajectoryShape(self.shape))
        except ValueError as e:
            raise ConfigurationError(f"Unknown trajectory shape '{self.shape}'") from e
        values = (self.rx, self.ry, self.z_amplitude, self.angular_rate, self.duration, self.imu_rate, self.speed)
        if not all(np.isfinite(v) for v in values):
            raise ConfigurationError("Trajectory parameters must be finite")
        if self.duration <= 0:
            raise ConfigurationError(f"duration must be > 0, got {self.duration}")
        if self.pose_count < 2:
            raise ConfigurationError(f"pose_count must be >= 2, got {self.pose_count}")
        if self.imu_rate <= 0:
            raise ConfigurationError(f"imu_rate must be > 0, got {self.imu_rate}")
        if self.shape is TrajectoryShape.LINE:
            if self.speed <= 0:
                raise ConfigurationError(f"Line speed must be > 0, got {self.speed}")
        else:
            if self.rx <= 0 or self.ry <= 0:
                raise ConfigurationError(f"Radii must be > 0, got rx={self.rx}, ry={self.ry}")
            if self.angular_rate <= 0:
                raise ConfigurationError(f"angular_rate must be > 0, got {self.angular_rate}")

    @property
    def pose_rate(self) -> float:
        return self.pose_count / self.duration


@dataclass(eq=False)
class GroundTruth:
    """Sampled truth: poses with velocities, world-frame acceleration and body-frame angular rate."""

    trajectory: Trajectory
    acc_world: np.ndarray
    gyro_body: np.ndarray
    spec: TrajectorySpec

    def __len__(self) -> int:
        return len(self.trajectory)

    def initial_state(self) -> NavState:
        return self.trajectory.state(0)

    @property
    def rate(self) -> float:
        return self.spec.pose_rate


def _path(spec: TrajectorySpec, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Position, velocity and acceleration of the analytic path."""
    w = spec.angular_rate
    zeros = np.zeros_like(t)
    if spec.shape is TrajectoryShape.LINE:
        p = np.column_stack([spec.speed * t, zeros, zeros])
        v = np.column_stack([np.full_like(t, spec.speed), zeros, zeros])
        return p, v, np.zeros_like(p)

    a = spec.z_amplitude
    z = a * np.sin(2 * w * t)
    dz = 2 * w * a * np.cos(2 * w * t)
    ddz = -4 * w * w * a * np.sin(2 * w * t)
    s, c = np.sin(w * t), np.cos(w * t)
    if spec.shape is TrajectoryShape.ELLIPSE3D:
        p = np.column_stack([spec.rx * c, spec.ry * s, z])
        v = np.column_stack([-spec.rx * w * s, spec.ry * w * c, dz])
        acc = np.column_stack([-spec.rx * w * w * c, -spec.ry * w * w * s, ddz])
    else:
        s2, c2 = np.sin(2 * w * t), np.cos(2 * w * t)
        p = np.column_stack([spec.rx * s, 0.5 * spec.ry * s2, z])
        v = np.column_stack([spec.rx * w * c, spec.ry * w * c2, dz])
        acc = np.column_stack([-spec.rx * w * w * s, -2 * spec.ry * w * w * s2, ddz])
    return p, v, acc


def _attitude(spec: TrajectorySpec, t: np.ndarray, v: np.ndarray, acc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """ZYX Euler angles following the horizontal tangent, and their rates."""
    yaw = np.arctan2(v[:, 1], v[:, 0])
    speed2 = v[:, 0] ** 2 + v[:, 1] ** 2
    yaw_rate = (v[:, 0] * acc[:, 1] - v[:, 1] * acc[:, 0]) / speed2
    if spec.shape is TrajectoryShape.LINE:
        zeros = np.zeros_like(t)
        return np.column_stack([yaw, zeros, zeros]), np.column_stack([yaw_rate, zeros, zeros])
    w = spec.angular_rate
    roll = spec.roll_amplitude * np.sin(w * t)
    roll_rate = spec.roll_amplitude * w * np.cos(w * t)
    pitch = spec.pitch_amplitude * np.cos(w * t)
    pitch_rate = -spec.pitch_amplitude * w * np.sin(w * t)
    return np.column_stack([yaw, pitch, roll]), np.column_stack([yaw_rate, pitch_rate, roll_rate])


def body_rates(ypr: np.ndarray, ypr_rate: np.ndarray) -> np.ndarray:
    """Body angular velocity of a ZYX attitude from its Euler angles and their rates."""
    _, pitch, roll = ypr.T
    yaw_rate, pitch_rate, roll_rate = ypr_rate.T
    return np.column_stack(
        [
            roll_rate - np.sin(pitch) * yaw_rate,
            np.cos(roll) * pitch_rate + np.sin(roll) * np.cos(pitch) * yaw_rate,
            -np.sin(roll) * pitch_rate + np.cos(roll) * np.cos(pitch) * yaw_rate,
        ]
    )


def generate_truth(spec: TrajectorySpec) -> GroundTruth:
    """Sample the analytic trajectory; derivatives are closed-form."""
    t = np.arange(spec.pose_count) / spec.pose_rate
    p, v, acc = _path(spec, t)
    ypr, ypr_rate = _attitude(spec, t, v, acc)
    q = euler_zyx_to_quaternions(ypr)
    gyro = body_rates(ypr, ypr_rate)
    return GroundTruth(trajectory=Trajectory(t=t, p=p, q=q / np.linalg.norm(q, axis=1, keepdims=True), v=v), acc_world=acc, gyro_body=gyro, spec=spec)

