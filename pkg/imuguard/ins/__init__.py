from imuguard.ins.integrator import IntegratorConfig, integrate, step

__all__ = [
    "IntegratorConfig",
    "integrate",
    "step",
]
