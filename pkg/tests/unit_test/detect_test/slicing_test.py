from __future__ import annotations

import numpy as np
import pytest

from imuguard.core.state import ImuStream
from imuguard.detect.slicing import slice_stream
from imuguard.exceptions import ConfigurationError


def _stream(n: int) -> ImuStream:
    t = np.arange(n) / 200.0
    acc = np.column_stack([np.arange(n), np.zeros(n), np.full(n, 9.81)])
    return ImuStream(t=t, acc=acc, gyro=np.ones((n, 3)))


@pytest.mark.parametrize(("n", "count", "residual"), [(120, 3, 0), (100, 2, 20), (39, 0, 39), (0, 0, 0)])
def test_slice_counts(n: int, count: int, residual: int) -> None:
    """floor(n / M) full slices and the remainder as residual."""
    sliced = slice_stream(_stream(n), 40)
    assert len(sliced) == count
    if residual:
        assert sliced.residual is not None
        assert sliced.residual.length == residual
        assert sliced.residual.start_index == count * 40
    else:
        assert sliced.residual is None


def test_slices_are_contiguous_and_disjoint() -> None:
    """Slices tile [0, 40), [40, 80), ... in order."""
    sliced = slice_stream(_stream(120), 40)
    assert [(s.start_index, s.stop_index) for s in sliced] == [(0, 40), (40, 80), (80, 120)]
    assert np.array_equal(sliced.slices[1].series[:, 0], np.arange(40, 80))


def test_slice_channels() -> None:
    """Gyroscope channels are included and weighted when present."""
    stream = _stream(80)
    assert slice_stream(stream, 40).dims == 6
    weighted = slice_stream(stream, 40, gyro_weight=2.0)
    assert np.allclose(weighted.slices[0].series[:, 3:], 2.0)
    assert slice_stream(stream, 40, dims=3).slices[0].series.shape == (40, 3)


def test_slice_length_must_be_positive() -> None:
    """M = 0 is a configuration error."""
    with pytest.raises(ConfigurationError):
        slice_stream(_stream(10), 0)
