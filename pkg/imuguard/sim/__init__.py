from imuguard.sim.glitch import GLITCH_PRESETS, GlitchSpec, inject_glitches
from imuguard.sim.imu import synthesize_imu
from imuguard.sim.trajectory import GroundTruth, TrajectorySpec, body_rates, generate_truth

__all__ = [
    "GLITCH_PRESETS",
    "GlitchSpec",
    "GroundTruth",
    "TrajectorySpec",
    "body_rates",
    "generate_truth",
    "inject_glitches",
    "synthesize_imu",
]
