from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from imuguard.__init__ import console
from imuguard.constants import DetectorMode, Verdict
from imuguard.detect.config import DetectorConfig
from imuguard.detect.report import DetectionReport, SliceRecord
from imuguard.detect.slicing import SliceSet
from imuguard.dtw.kernel import zscore
from imuguard.dtw.matcher import MatchResult
from imuguard.exceptions import ConfigurationError, ShapeError
from imuguard.utils.colorlogging import ColorLog
from imuguard.utils.parallel import resolve_parallelism

logger = ColorLog(console, __name__).logger


def detect_dtw(slices: SliceSet, cfg: DetectorConfig) -> DetectionReport:
    """Classify every full slice by its best DTW match against the template library.

    A slice is normal iff its best-match distance is at most `dtw_threshold`. Slices
    are matched concurrently and reported in stream order; the residual window is
    reported as unprocessed.
    """
    if cfg.mode is not DetectorMode.DTW or cfg.library is None or cfg.dtw_threshold is None:
        raise ConfigurationError("detect_dtw needs a dtw-mode detector configuration")
    library = cfg.library
    if slices.dims != library.dims:
        raise ShapeError(f"Slices have {slices.dims} channels but the template library has {library.dims}")
    if slices.dims == 6 and slices.gyro_weight != library.gyro_weight:
        raise ShapeError(f"Slices use gyro weight {slices.gyro_weight} but the library was built with {library.gyro_weight}")

    series = [zscore(s.series) if cfg.znormalize else s.series for s in slices]
    workers = resolve_parallelism(cfg.parallelism)
    with library.matcher(parallelism=1, znormalize=cfg.znormalize) as matcher:
        if workers > 1 and len(series) > 1:
            with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="detect") as pool:
                matches: list[MatchResult] = list(pool.map(matcher.best, series))
        else:
            matches = [matcher.best(s) for s in series]

    records = []
    for sl, match in zip(slices, matches):
        verdict = Verdict.NORMAL if match.distance <= cfg.dtw_threshold else Verdict.ABNORMAL
        records.append(
            SliceRecord(
                start_index=sl.start_index,
                length=sl.length,
                verdict=verdict,
                best_distance=match.distance,
                matched_template_id=str(match.template_id),
            )
        )
    if slices.residual is not None:
        records.append(SliceRecord(start_index=slices.residual.start_index, length=slices.residual.length, verdict=Verdict.UNPROCESSED))

    abnormal = sum(r.verdict is Verdict.ABNORMAL for r in records)
    logger.info(f"DTW detector: {abnormal} of {len(slices)} slices abnormal at threshold {cfg.dtw_threshold:.6g}")
    return DetectionReport(
        mode=DetectorMode.DTW,
        stream_length=len(slices.stream),
        threshold=float(cfg.dtw_threshold),
        records=records,
        slice_len=slices.slice_len,
    )
