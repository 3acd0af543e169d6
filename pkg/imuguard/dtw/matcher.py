from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from imuguard.__init__ import console
from imuguard.dtw.kernel import as_series, distances_to_templates
from imuguard.exceptions import ConfigurationError, ShapeError
from imuguard.utils.colorlogging import ColorLog
from imuguard.utils.parallel import resolve_parallelism

logger = ColorLog(console, __name__).logger


@dataclass(frozen=True)
class MatchResult:
    """Closest template and its DTW distance."""

    template_id: str | int
    distance: float
    index: int = 0


class TemplateMatcher:
    """Matches query series against a fixed set of equally long templates.

    Templates are split into contiguous chunks, one per worker thread. The DTW kernel
    releases the GIL, so chunks run concurrently. The minimum is taken over the
    distances in template order, which makes the result independent of the number
    of workers.
    """

    def __init__(
        self,
        templates: Sequence[np.ndarray],
        ids: Sequence[str | int] | None = None,
        parallelism: int = 1,
    ) -> None:
        if len(templates) == 0:
            raise ConfigurationError("Template matching needs at least one template")
        series = [as_series(t) for t in templates]
        lengths = {s.shape[0] for s in series}
        dims = {s.shape[1] for s in series}
        if len(dims) != 1:
            raise ShapeError(f"Templates have mixed channel counts: {sorted(dims)}")
        if len(lengths) != 1:
            raise ShapeError(f"Templates have mixed lengths: {sorted(lengths)}")
        if ids is not None and len(ids) != len(series):
            raise ConfigurationError(f"Got {len(ids)} template ids for {len(series)} templates")
        self.templates = np.ascontiguousarray(np.stack(series))
        self.ids = list(ids) if ids is not None else list(range(len(series)))
        self.parallelism = min(resolve_parallelism(parallelism), len(series))
        self._chunks = [(int(c[0]), int(c[-1]) + 1) for c in np.array_split(np.arange(len(series)), self.parallelism)]
        self._executor: ThreadPoolExecutor | None = None
        if self.parallelism > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.parallelism, thread_name_prefix="dtw")

    @property
    def dims(self) -> int:
        return int(self.templates.shape[2])

    def distances(self, query: np.ndarray) -> np.ndarray:
        """DTW distance from `query` to every template, in template order."""
        Q = as_series(query)
        if Q.shape[1] != self.dims:
            raise ShapeError(f"Query has {Q.shape[1]} channels but templates have {self.dims}")
        if self._executor is None:
            return distances_to_templates(Q, self.templates)
        futures = [self._executor.submit(distances_to_templates, Q, self.templates, start, stop) for start, stop in self._chunks]
        return np.concatenate([f.result() for f in futures])

    def best(self, query: np.ndarray) -> MatchResult:
        dist = self.distances(query)
        # argmin returns the first minimum, so ties go to the lowest index
        idx = int(np.argmin(dist))
        return MatchResult(template_id=self.ids[idx], distance=float(dist[idx]), index=idx)

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> TemplateMatcher:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def best_match(
    Q: np.ndarray,
    templates: Sequence[np.ndarray],
    parallelism: int = 1,
    ids: Sequence[str | int] | None = None,
) -> MatchResult:
    """Return the template closest to Q under DTW (lowest index on ties).

    Args:
        Q: Query series (M x d).
        templates: Equally long template series (N x d each).
        parallelism: Number of worker threads, capped by IMU_GUARD_THREADS.
        ids: Optional template identifiers; defaults to the template index.

    Returns:
        MatchResult: Identifier and distance of the best template.
    """
    with TemplateMatcher(templates, ids=ids, parallelism=parallelism) as matcher:
        return matcher.best(Q)
