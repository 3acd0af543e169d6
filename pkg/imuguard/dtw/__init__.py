from imuguard.dtw.benchmark import BenchmarkRow, bench_dtw
from imuguard.dtw.kernel import (
    as_series,
    cost_matrix,
    dtw_distance,
    dtw_distance_full,
    pairwise_distances,
    point_cost,
    zscore,
)
from imuguard.dtw.matcher import MatchResult, TemplateMatcher, best_match

__all__ = [
    "BenchmarkRow",
    "MatchResult",
    "TemplateMatcher",
    "as_series",
    "bench_dtw",
    "best_match",
    "cost_matrix",
    "dtw_distance",
    "dtw_distance_full",
    "pairwise_distances",
    "point_cost",
    "zscore",
]
