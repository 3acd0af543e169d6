from __future__ import annotations

import numpy as np

from imuguard.core.quaternion import Quaternion, require_unit_quaternions, rotate_many
from imuguard.core.state import ImuBias, ImuSample, NoiseSpec, WorldModel
from imuguard.exceptions import ShapeError


def measure(
    true_acc_world: np.ndarray,
    true_gyro_body: np.ndarray,
    q_world_to_body: Quaternion,
    bias: ImuBias,
    noise: NoiseSpec,
    world: WorldModel,
    t: float = 0.0,
    rng: np.random.Generator | None = None,
) -> ImuSample:
    """Simulate one IMU reading from the true motion.

    acc = R(q_world_to_body) (a^w + g^w) + b^a + n^a and gyro = w^b + b^g + n^g,
    with the noise drawn i.i.d. Gaussian per axis.

    Args:
        true_acc_world: True acceleration in the world frame (m/s^2).
        true_gyro_body: True angular rate in the body frame (rad/s).
        q_world_to_body: Rotation taking world vectors into the body frame.
        bias: Additive sensor offsets.
        noise: Noise levels; when `rng` is None a generator is seeded from `noise.seed`.
        world: Gravity model.
        t: Timestamp of the produced sample.
        rng: Shared generator, used to draw many samples from one seed.

    Returns:
        ImuSample: The simulated reading.
    """
    q_world_to_body.require_unit()
    if rng is None:
        rng = noise.rng()
    acc, gyro = measure_many(
        np.asarray(true_acc_world, dtype=np.float64)[None],
        np.asarray(true_gyro_body, dtype=np.float64)[None],
        q_world_to_body.as_array()[None],
        bias,
        noise,
        world,
        rng,
    )
    return ImuSample(t=t, acc=acc[0], gyro=gyro[0])


def measure_many(
    acc_world: np.ndarray,
    gyro_body: np.ndarray,
    q_world_to_body: np.ndarray,
    bias: ImuBias,
    noise: NoiseSpec,
    world: WorldModel,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised form of `measure` over n rows; returns (acc, gyro), each (n, 3)."""
    acc_world = np.asarray(acc_world, dtype=np.float64)
    gyro_body = np.asarray(gyro_body, dtype=np.float64)
    if acc_world.shape != gyro_body.shape or acc_world.ndim != 2 or acc_world.shape[1] != 3:
        raise ShapeError(f"Expected matching (n, 3) arrays, got {acc_world.shape} and {gyro_body.shape}")
    require_unit_quaternions(q_world_to_body)
    n = acc_world.shape[0]
    acc = rotate_many(q_world_to_body, acc_world + world.gravity) + bias.acc
    gyro = gyro_body + bias.gyro
    # Draw order is fixed (acc then gyro) so streams are reproducible from the seed
    acc_noise = rng.normal(0.0, 1.0, size=(n, 3)) * noise.acc_sigma
    gyro_noise = rng.normal(0.0, 1.0, size=(n, 3)) * noise.gyro_sigma
    return acc + acc_noise, gyro + gyro_noise
