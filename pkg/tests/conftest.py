from __future__ import annotations

import os
import random
import sys

import numpy as np
import pytest
from hydra import compose, initialize
from omegaconf import DictConfig

from imuguard.constants import STANDARD_GRAVITY
from imuguard.core.state import ImuStream, NoiseSpec
from imuguard.sim.imu import synthesize_imu
from imuguard.sim.trajectory import GroundTruth, TrajectorySpec, generate_truth

# Add the root directory to the PYTHONPATH
# This allows pytest to find the modules for testing

root_dir = os.path.dirname(os.path.dirname(__file__))
sys.path.append(root_dir)


def reset_seed(seed: int = 42) -> None:
    """Function to reset seeds."""
    np.random.seed(seed)
    random.seed(seed)


@pytest.fixture()
def _reset_seed() -> None:
    """A pytest fixture to reset the seeds at the start of relevant tests."""
    reset_seed()


@pytest.fixture(scope="session")
def pipeline_config() -> DictConfig:
    """A pytest fixture to read in the Hydra config used for fast pipeline runs."""
    with initialize(version_base=None, config_path="../imuguard/configs"):
        cfg = compose(config_name="pipeline_unit_test")

    return cfg


@pytest.fixture(scope="session")
def small_truth() -> GroundTruth:
    """Five seconds of the default ellipse sampled at 200 Hz."""
    return generate_truth(TrajectorySpec(pose_count=1000, duration=5.0))


@pytest.fixture(scope="session")
def noise_free_stream(small_truth: GroundTruth) -> ImuStream:
    """Exact IMU readings of `small_truth`."""
    return synthesize_imu(small_truth)


@pytest.fixture(scope="session")
def noisy_stream(small_truth: GroundTruth) -> ImuStream:
    """IMU readings of `small_truth` with the default sensor noise."""
    return synthesize_imu(small_truth, noise=NoiseSpec(acc_sigma=0.05, gyro_sigma=0.005, seed=0))


@pytest.fixture()
def static_stream() -> ImuStream:
    """A noise-free sensor at rest, level, 200 Hz for one second."""
    n = 200
    acc = np.tile([0.0, 0.0, STANDARD_GRAVITY], (n, 1))
    return ImuStream(t=np.arange(n) / 200.0, acc=acc, gyro=np.zeros((n, 3)))
