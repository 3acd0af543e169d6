from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from imuguard.dtw.kernel import (
    as_series,
    cost_matrix,
    dtw_distance,
    dtw_distance_full,
    pairwise_distances,
    point_cost,
    zscore,
)
from imuguard.exceptions import DataError, EmptyInputError, ShapeError


@pytest.mark.parametrize(
    ("P", "Q", "expected"),
    [
        ([0.0, 1.0, 2.0], [0.0, 1.0, 2.0], 0.0),
        ([1.0, 2.0, 3.0], [1.0, 2.0, 2.0, 3.0], 0.0),
        ([0.0], [1.0, 2.0], 5.0),
        ([0.0, 0.0], [1.0], 2.0),
        ([0.0, 3.0], [1.0, 1.0, 3.0], 2.0),
    ],
)
def test_dtw_distance_known_values(P: list[float], Q: list[float], expected: float) -> None:
    """Hand-computed distances with squared step costs and no normalisation."""
    assert dtw_distance(P, Q) == pytest.approx(expected)
    assert dtw_distance_full(P, Q) == pytest.approx(expected)


def test_rolling_matches_full_matrix_oracle() -> None:
    """The single-row kernel reproduces the full accumulated-cost matrix exactly."""
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        d = int(rng.choice([1, 3, 6]))
        P = rng.normal(size=(int(rng.integers(1, 21)), d))
        Q = rng.normal(size=(int(rng.integers(1, 21)), d))
        assert dtw_distance(P, Q) == dtw_distance_full(P, Q)


def test_warping_path_is_monotone_and_optimal() -> None:
    """The traced path runs corner to corner and its costs add up to the distance."""
    rng = np.random.default_rng(5)
    P = rng.normal(size=(12, 3))
    Q = rng.normal(size=(9, 3))
    distance, path = dtw_distance_full(P, Q, return_path=True)
    assert path[0] == (0, 0)
    assert path[-1] == (11, 8)
    steps = np.diff(np.array(path), axis=0)
    assert np.all((steps >= 0) & (steps <= 1))
    assert np.all(steps.sum(axis=1) >= 1)
    C = cost_matrix(P, Q)
    assert sum(C[i, j] for i, j in path) == pytest.approx(distance)


def test_diagonal_path_for_identical_series() -> None:
    """Equal series align one to one."""
    P = np.arange(5.0)
    _, path = dtw_distance_full(P, P, return_path=True)
    assert path == [(i, i) for i in range(5)]


def test_point_cost_is_squared_euclidean() -> None:
    """No square root is taken."""
    assert point_cost([0.0, 0.0, 0.0], [1.0, 2.0, 2.0]) == pytest.approx(9.0)
    with pytest.raises(ShapeError):
        point_cost([0.0, 0.0], [1.0, 2.0, 2.0])


def test_series_validation() -> None:
    """Mismatched, empty, non-finite and higher-rank inputs are rejected."""
    with pytest.raises(ShapeError):
        dtw_distance(np.zeros((3, 3)), np.zeros((3, 6)))
    with pytest.raises(EmptyInputError):
        dtw_distance(np.zeros((0, 3)), np.zeros((3, 3)))
    with pytest.raises(ShapeError):
        as_series(np.zeros((2, 2, 2)))
    with pytest.raises(DataError):
        as_series([0.0, np.nan])
    assert as_series([1.0, 2.0]).shape == (2, 1)


@settings(max_examples=50, deadline=None)
@given(
    P=arrays(np.float64, st.tuples(st.integers(1, 10), st.just(3)), elements=st.floats(-100, 100)),
    Q=arrays(np.float64, st.tuples(st.integers(1, 10), st.just(3)), elements=st.floats(-100, 100)),
)
def test_distance_properties(P: np.ndarray, Q: np.ndarray) -> None:
    """Non-negative, zero on itself, symmetric, and bounded by any monotone path."""
    d = dtw_distance(P, Q)
    assert d >= 0.0
    assert dtw_distance(P, P) == 0.0
    assert dtw_distance(Q, P) == pytest.approx(d)
    # The path through the first column then the last row is one admissible path
    C = cost_matrix(P, Q)
    assert d <= C[:, 0].sum() + C[-1, 1:].sum() + 1e-9 * (1.0 + abs(d))


def test_pairwise_distances_symmetric() -> None:
    """Pairwise matrix has a zero diagonal and matches single distances."""
    rng = np.random.default_rng(0)
    series = [rng.normal(size=(8, 2)) for _ in range(4)]
    D = pairwise_distances(series)
    assert D.shape == (4, 4)
    assert np.allclose(np.diag(D), 0.0)
    assert np.array_equal(D, D.T)
    assert D[1, 3] == dtw_distance(series[1], series[3])


def test_zscore_per_channel() -> None:
    """Channels get zero mean and unit variance; constant channels are only centred."""
    series = np.column_stack([np.arange(10.0), np.full(10, 4.0)])
    out = zscore(series)
    assert np.allclose(out.mean(axis=0), 0.0)
    assert out[:, 0].std() == pytest.approx(1.0)
    assert np.allclose(out[:, 1], 0.0)


@pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
def test_scaling_both_series_scales_distance_by_square(c: float) -> None:
    rng = np.random.default_rng(11)
    P = rng.normal(size=(15, 6))
    Q = rng.normal(size=(12, 6))
    assert dtw_distance(c * P, c * Q) == pytest.approx(c * c * dtw_distance(P, Q), rel=1e-12)
