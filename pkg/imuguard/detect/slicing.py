from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from imuguard.core.state import ImuStream
from imuguard.exceptions import ConfigurationError
from imuguard.types import SeriesArray


@dataclass(frozen=True, eq=False)
class Slice:
    """Window of consecutive samples and its channel matrix (rows x d)."""

    start_index: int
    samples: ImuStream
    series: SeriesArray

    @property
    def length(self) -> int:
        return len(self.samples)

    @property
    def stop_index(self) -> int:
        return self.start_index + self.length


@dataclass(eq=False)
class SliceSet:
    """Non-overlapping slices of a stream plus the trailing partial window, if any."""

    stream: ImuStream
    slice_len: int
    dims: int
    gyro_weight: float
    slices: list[Slice]
    residual: Slice | None = None

    def __len__(self) -> int:
        return len(self.slices)

    def __iter__(self):
        return iter(self.slices)

    def series(self) -> list[np.ndarray]:
        return [s.series for s in self.slices]


def slice_stream(
    stream: ImuStream,
    M: int,
    dims: int | None = None,
    gyro_weight: float = 1.0,
) -> SliceSet:
    """Cut a stream into floor(len / M) slices of M samples.

    Args:
        stream: Time-ordered samples.
        M: Slice length in samples.
        dims: 3 (accelerometer) or 6 (accelerometer then weighted gyroscope). Defaults
            to 6 when the stream carries gyroscope data.
        gyro_weight: Scale applied to gyroscope channels in six-channel series.

    Returns:
        SliceSet: Full slices in stream order and the residual window.
    """
    if M <= 0:
        raise ConfigurationError(f"Slice length must be positive, got {M}")
    if dims is None:
        dims = 6 if stream.has_gyro else 3
    channels = stream.channels(dims, gyro_weight) if len(stream) else np.zeros((0, dims))
    n_full = len(stream) // M
    slices = [
        Slice(start_index=i * M, samples=stream[i * M : (i + 1) * M], series=channels[i * M : (i + 1) * M])
        for i in range(n_full)
    ]
    residual = None
    if n_full * M < len(stream):
        start = n_full * M
        residual = Slice(start_index=start, samples=stream[start:], series=channels[start:])
    return SliceSet(stream=stream, slice_len=M, dims=dims, gyro_weight=gyro_weight, slices=slices, residual=residual)
