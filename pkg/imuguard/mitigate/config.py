from __future__ import annotations

from dataclasses import dataclass

from imuguard.constants import MitigationMode
from imuguard.exceptions import ConfigurationError

RESAMPLE_METHODS = ("linear",)


@dataclass(frozen=True)
class MitigationConfig:
    """Mitigation settings.

    Attributes:
        mode: clamp, moving_average or template_substitution.
        window_n: Number of preceding clean samples averaged (moving_average).
        resample: Template length adaptation; only linear interpolation is supported.
    """

    mode: MitigationMode
    window_n: int = 5
    resample: str = "linear"

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "mode", MitigationMode(self.mode))
        except ValueError as e:
            raise ConfigurationError(f"Unknown mitigation mode '{self.mode}'") from e
        if self.mode is MitigationMode.NONE:
            raise ConfigurationError("A mitigation config needs a mode other than 'none'")
        if self.window_n < 1:
            raise ConfigurationError(f"window_n must be >= 1, got {self.window_n}")
        if self.resample not in RESAMPLE_METHODS:
            raise ConfigurationError(f"Unknown resampling method '{self.resample}', expected one of {RESAMPLE_METHODS}")
