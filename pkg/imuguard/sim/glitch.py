from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from imuguard.__init__ import console
from imuguard.constants import AXIS_INDEX
from imuguard.core.state import ImuStream
from imuguard.exceptions import ConfigurationError
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger

# (mu, sigma) of the additive glitch noise in m/s^2
GLITCH_PRESETS: dict[str, tuple[float, float]] = {
    "n0_1": (0.0, 1.0),
    "n1_10": (1.0, 10.0),
    "n50_10": (50.0, 10.0),
}


@dataclass(frozen=True)
class GlitchSpec:
    """Bursts of additive Gaussian noise on selected accelerometer axes."""

    mu: float
    sigma: float
    affected_fraction: float = 0.01
    burst_len: int = 5
    axes: tuple[str, ...] = ("z",)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        if self.sigma < 0:
            raise ConfigurationError(f"Glitch sigma must be >= 0, got {self.sigma}")
        if not 0.0 <= self.affected_fraction <= 1.0:
            raise ConfigurationError(f"affected_fraction must be in [0, 1], got {self.affected_fraction}")
        if self.burst_len < 1:
            raise ConfigurationError(f"burst_len must be >= 1, got {self.burst_len}")
        if not self.axes or any(a not in AXIS_INDEX for a in self.axes):
            raise ConfigurationError(f"axes must be a non-empty subset of x, y, z, got {self.axes}")

    @classmethod
    def preset(cls, name: str, **overrides) -> GlitchSpec:
        try:
            mu, sigma = GLITCH_PRESETS[name]
        except KeyError as e:
            raise ConfigurationError(f"Unknown glitch preset '{name}', expected one of {sorted(GLITCH_PRESETS)}") from e
        return replace(cls(mu=mu, sigma=sigma), **overrides)


def inject_glitches(stream: ImuStream, spec: GlitchSpec) -> tuple[ImuStream, np.ndarray]:
    """Add glitch bursts at random non-overlapping positions.

    The number of bursts is round(fraction * n) rounded to whole bursts (at least
    one). Each masked sample gets an independent N(mu, sigma^2) draw per selected axis.

    Returns:
        The corrupted stream and the boolean mask of corrupted samples.
    """
    n = len(stream)
    mask = np.zeros(n, dtype=bool)
    if spec.affected_fraction == 0.0:
        return stream.copy(), mask
    if spec.affected_fraction * n < 1.0:
        raise ConfigurationError(f"affected_fraction {spec.affected_fraction} of {n} samples is less than one sample")

    L = spec.burst_len
    bursts = max(1, int(round(round(spec.affected_fraction * n) / L)))
    if bursts * L > n:
        raise ConfigurationError(f"{bursts} bursts of {L} samples do not fit in {n} samples")
    rng = np.random.default_rng(spec.seed)
    # Sorted distinct slots spread by L - 1 give starts at least L apart
    slots = np.sort(rng.choice(n - bursts * (L - 1), size=bursts, replace=False))
    starts = slots + np.arange(bursts) * (L - 1)

    acc = stream.acc.copy()
    axes = [AXIS_INDEX[a] for a in spec.axes]
    for start in starts:
        mask[start : start + L] = True
        acc[start : start + L, axes] += rng.normal(spec.mu, spec.sigma, size=(L, len(axes)))
    logger.info(f"Injected {bursts} glitch bursts of {L} samples (N({spec.mu:g}, {spec.sigma:g}) on {','.join(spec.axes)})")
    return stream.replace(acc=acc), mask
