from __future__ import annotations

from imuguard.core.measurement import measure, measure_many
from imuguard.core.quaternion import Quaternion, rotate, rotate_many
from imuguard.core.state import ImuBias, ImuSample, ImuStream, NavState, NoiseSpec, Trajectory, WorldModel

__all__ = [
    "ImuBias",
    "ImuSample",
    "ImuStream",
    "NavState",
    "NoiseSpec",
    "Quaternion",
    "Trajectory",
    "WorldModel",
    "measure",
    "measure_many",
    "rotate",
    "rotate_many",
]
