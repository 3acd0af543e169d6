from __future__ import annotations

import numpy as np

from imuguard.__init__ import console
from imuguard.core.measurement import measure_many
from imuguard.core.quaternion import quat_conjugate
from imuguard.core.state import ImuBias, ImuStream, NoiseSpec, WorldModel
from imuguard.exceptions import ResamplingError
from imuguard.sim.trajectory import GroundTruth
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


def synthesize_imu(
    truth: GroundTruth,
    bias: ImuBias | None = None,
    noise: NoiseSpec | None = None,
    world: WorldModel | None = None,
    rate: float | None = None,
) -> ImuStream:
    """Apply the measurement model to the truth at `rate` Hz.

    The rate must divide the truth pose rate; measurements are taken at every
    k-th pose. Output is a pure function of the inputs and `noise.seed`.
    """
    bias = bias or ImuBias()
    noise = noise or NoiseSpec()
    world = world or WorldModel()
    rate = truth.spec.imu_rate if rate is None else rate
    if rate <= 0:
        raise ResamplingError(f"IMU rate must be > 0, got {rate}")
    ratio = truth.rate / rate
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > 1e-6:
        raise ResamplingError(f"IMU rate {rate} Hz does not divide the truth pose rate {truth.rate} Hz")

    idx = np.arange(0, len(truth), stride)
    traj = truth.trajectory
    acc, gyro = measure_many(
        truth.acc_world[idx],
        truth.gyro_body[idx],
        quat_conjugate(traj.q[idx]),
        bias,
        noise,
        world,
        noise.rng(),
    )
    logger.debug(f"Synthesized {idx.size} IMU samples at {rate:g} Hz (seed {noise.seed})")
    return ImuStream(t=traj.t[idx].copy(), acc=acc, gyro=gyro)
