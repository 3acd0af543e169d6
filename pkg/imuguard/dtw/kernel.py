"""Dynamic time warping kernels.

`dtw_distance` keeps a single row of M + 1 cells and uses the symmetric
min(diagonal, left, up) recurrence with squared Euclidean step costs and no path
normalisation. `dtw_distance_full` fills the whole accumulated-cost matrix and is
kept as the reference implementation (it also recovers the warping path).
"""

from __future__ import annotations

import numba as nb
import numpy as np

from imuguard.exceptions import DataError, EmptyInputError, ShapeError
from imuguard.types import CostMatrix, SeriesArray, TemplateStack

# fastmath stays off: the rolling and full-matrix variants must agree bit for bit
jitkw = {
    "nopython": True,
    "nogil": True,
    "cache": True,
    "fastmath": False,
}


@nb.jit(**jitkw)
def _point_cost(p: np.ndarray, q: np.ndarray) -> float:
    total = 0.0
    for c in range(p.shape[0]):
        diff = p[c] - q[c]
        total += diff * diff
    return total


@nb.jit(**jitkw)
def _dtw_rolling(P: np.ndarray, Q: np.ndarray) -> float:
    M = Q.shape[0]
    T = np.empty(M + 1)
    T[0] = 0.0
    for j in range(1, M + 1):
        T[j] = np.inf
    for i in range(P.shape[0]):
        upper_left = T[0]
        T[0] = np.inf
        for j in range(M):
            up = T[j + 1]
            best = min(upper_left, up, T[j])
            upper_left = up
            T[j + 1] = _point_cost(P[i], Q[j]) + best
    return T[M]


@nb.jit(**jitkw)
def _cost_matrix(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    C = np.empty((P.shape[0], Q.shape[0]))
    for i in range(P.shape[0]):
        for j in range(Q.shape[0]):
            C[i, j] = _point_cost(P[i], Q[j])
    return C


@nb.jit(**jitkw)
def _distances_to_stack(Q: np.ndarray, templates: np.ndarray, start: int, stop: int) -> np.ndarray:
    out = np.empty(stop - start)
    for k in range(start, stop):
        out[k - start] = _dtw_rolling(templates[k], Q)
    return out


@nb.jit(**jitkw)
def _pairwise(stack: np.ndarray) -> np.ndarray:
    k = stack.shape[0]
    D = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            d = _dtw_rolling(stack[a], stack[b])
            D[a, b] = d
            D[b, a] = d
    return D


def as_series(data: SeriesArray | np.ndarray | list) -> np.ndarray:
    """Validate and convert to a C-contiguous (rows, channels) float64 array.

    One-dimensional input is read as a single-channel series.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeError(f"A series must be a (rows, channels) matrix, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptyInputError(f"A series needs at least one row and one channel, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DataError("Series entries must be finite")
    return np.ascontiguousarray(arr)


def _check_same_dims(P: np.ndarray, Q: np.ndarray) -> None:
    if P.shape[1] != Q.shape[1]:
        raise ShapeError(f"Series have different channel counts: {P.shape[1]} vs {Q.shape[1]}")


def point_cost(p: np.ndarray | list[float], q: np.ndarray | list[float]) -> float:
    """Squared Euclidean distance between two equally sized vectors."""
    p = np.ascontiguousarray(p, dtype=np.float64).reshape(-1)
    q = np.ascontiguousarray(q, dtype=np.float64).reshape(-1)
    if p.shape != q.shape:
        raise ShapeError(f"Vectors have different dimensions: {p.shape[0]} vs {q.shape[0]}")
    return float(_point_cost(p, q))


def dtw_distance(P: SeriesArray, Q: SeriesArray) -> float:
    """DTW distance between P (N x d) and Q (M x d) using one row of M + 1 cells."""
    P = as_series(P)
    Q = as_series(Q)
    _check_same_dims(P, Q)
    return float(_dtw_rolling(P, Q))


def cost_matrix(P: SeriesArray, Q: SeriesArray) -> CostMatrix:
    """Step cost of every row pair of P and Q."""
    P = as_series(P)
    Q = as_series(Q)
    _check_same_dims(P, Q)
    return _cost_matrix(P, Q)


def dtw_distance_full(
    P: SeriesArray, Q: SeriesArray, return_path: bool = False
) -> float | tuple[float, list[tuple[int, int]]]:
    """Full accumulated-cost DTW.

    Args:
        P: Series of N rows.
        Q: Series of M rows with the same channel count.
        return_path: Also return the optimal warping path as (row of P, row of Q)
            pairs from (0, 0) to (N - 1, M - 1).

    Returns:
        The distance, or (distance, path) when `return_path` is set.
    """
    C = cost_matrix(P, Q)
    n, m = C.shape
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(n):
        for j in range(m):
            D[i + 1, j + 1] = C[i, j] + min(D[i, j], D[i, j + 1], D[i + 1, j])
    distance = float(D[n, m])
    if not return_path:
        return distance
    return distance, _traceback(D)


def _traceback(D: np.ndarray) -> list[tuple[int, int]]:
    i, j = D.shape[0] - 2, D.shape[1] - 2
    path = [(i, j)]
    while i > 0 or j > 0:
        # Prefer the diagonal move on ties
        candidates = ((D[i, j], i - 1, j - 1), (D[i, j + 1], i - 1, j), (D[i + 1, j], i, j - 1))
        _, i, j = min(candidates, key=lambda c: c[0])
        path.append((i, j))
    path.reverse()
    return path


def distances_to_templates(Q: SeriesArray, templates: TemplateStack, start: int = 0, stop: int | None = None) -> np.ndarray:
    """DTW distance from Q to templates[start:stop]; templates is a (k, N, d) stack."""
    stop = templates.shape[0] if stop is None else stop
    return _distances_to_stack(Q, templates, start, stop)


def pairwise_distances(series: TemplateStack | list[np.ndarray]) -> np.ndarray:
    """Symmetric matrix of DTW distances between equally long series."""
    stack = np.ascontiguousarray(np.stack([as_series(s) for s in series]))
    return _pairwise(stack)


def zscore(series: SeriesArray) -> np.ndarray:
    """Per-channel standardisation; constant channels are only centred."""
    arr = as_series(series)
    std = arr.std(axis=0)
    std[std == 0.0] = 1.0
    return (arr - arr.mean(axis=0)) / std
