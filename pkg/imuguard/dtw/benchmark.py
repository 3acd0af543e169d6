from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from tqdm import tqdm

from imuguard.__init__ import console
from imuguard.dtw.matcher import MatchResult, TemplateMatcher
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


@dataclass(frozen=True)
class BenchmarkRow:
    """Latency of one best-match evaluation at a given parallelism level."""

    parallelism: int
    median_ms: float
    min_ms: float
    speedup: float
    result: MatchResult


def bench_dtw(
    k: int = 10,
    template_len: int = 40,
    slice_len: int = 40,
    dims: int = 3,
    levels: Sequence[int] = (1, 2, 4, 8),
    repeats: int = 200,
    seed: int = 0,
    show_progress: bool = True,
) -> list[BenchmarkRow]:
    """Time best-match evaluations against k random templates for each parallelism level.

    The first evaluation at each level is a warm-up (JIT compilation, thread start)
    and is not timed. Speed-up is relative to the first level.
    """
    rng = np.random.default_rng(seed)
    templates = [rng.normal(size=(template_len, dims)) for _ in range(k)]
    query = rng.normal(size=(slice_len, dims))

    rows: list[BenchmarkRow] = []
    baseline: float | None = None
    for level in levels:
        with TemplateMatcher(templates, parallelism=level) as matcher:
            result = matcher.best(query)
            timings = np.empty(repeats)
            for r in tqdm(range(repeats), desc=f"l={level}", disable=not show_progress, leave=False):
                start = time.perf_counter()
                matcher.best(query)
                timings[r] = time.perf_counter() - start
        median_ms = float(np.median(timings) * 1e3)
        if baseline is None:
            baseline = median_ms
        rows.append(
            BenchmarkRow(
                parallelism=matcher.parallelism,
                median_ms=median_ms,
                min_ms=float(timings.min() * 1e3),
                speedup=baseline / median_ms if median_ms > 0 else float("inf"),
                result=result,
            )
        )
        logger.info(f"Parallelism {matcher.parallelism}: median {median_ms:.4f} ms per evaluation")
    return rows
