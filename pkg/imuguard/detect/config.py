from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from imuguard.constants import DEFAULT_SLICE_LEN, STANDARD_GRAVITY, DetectorMode
from imuguard.exceptions import ConfigurationError

if TYPE_CHECKING:
    from imuguard.detect.templates import TemplateLibrary


@dataclass(frozen=True, eq=False)
class DetectorConfig:
    """Detector settings.

    Attributes:
        mode: `threshold` or `dtw`.
        acc_threshold: Per-axis deviation limit in m/s^2 (threshold mode).
        dtw_threshold: Largest best-match distance still classified normal (dtw mode).
        library: Template library (dtw mode).
        slice_len: Samples per slice (dtw mode).
        dims: Channels per slice; defaults to the library's.
        parallelism: Worker threads, capped by IMU_GUARD_THREADS.
        znormalize: Standardise each channel of slices and templates before matching.
        gravity_norm: |g| used for the static reference (0, 0, |g|).
    """

    mode: DetectorMode
    acc_threshold: float | None = None
    dtw_threshold: float | None = None
    library: TemplateLibrary | None = None
    slice_len: int = DEFAULT_SLICE_LEN
    dims: int | None = None
    parallelism: int = 1
    znormalize: bool = False
    gravity_norm: float = STANDARD_GRAVITY

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "mode", DetectorMode(self.mode))
        except ValueError as e:
            raise ConfigurationError(f"Unknown detector mode '{self.mode}'") from e
        if self.mode is DetectorMode.THRESHOLD:
            if self.acc_threshold is None or not self.acc_threshold > 0:
                raise ConfigurationError(f"Threshold detection needs acc_threshold > 0, got {self.acc_threshold}")
        elif self.mode is DetectorMode.DTW:
            if self.dtw_threshold is None or not self.dtw_threshold > 0:
                raise ConfigurationError(f"DTW detection needs dtw_threshold > 0, got {self.dtw_threshold}")
            if self.library is None or len(self.library) == 0:
                raise ConfigurationError("DTW detection needs a non-empty template library")
            if self.dims is not None and self.dims != self.library.dims:
                raise ConfigurationError(f"dims={self.dims} does not match the library's d={self.library.dims}")
        else:
            raise ConfigurationError(f"Detector mode must be 'threshold' or 'dtw', got '{self.mode.value}'")
        if self.slice_len <= 0:
            raise ConfigurationError(f"Slice length must be positive, got {self.slice_len}")
        if self.parallelism < 1:
            raise ConfigurationError(f"Parallelism must be >= 1, got {self.parallelism}")

    @property
    def series_dims(self) -> int | None:
        if self.dims is not None:
            return self.dims
        return None if self.library is None else self.library.dims
