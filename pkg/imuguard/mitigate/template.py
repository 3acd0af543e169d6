from __future__ import annotations

import numpy as np

from imuguard.__init__ import console
from imuguard.constants import DetectorMode, MitigationMode
from imuguard.detect.report import DetectionReport
from imuguard.detect.slicing import SliceSet
from imuguard.detect.templates import TemplateLibrary
from imuguard.exceptions import ConfigurationError, CorruptedReportError
from imuguard.mitigate.config import MitigationConfig
from imuguard.mitigate.log import MitigationChange, MitigationLog, MitigationResult
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


def resample_rows(rows: np.ndarray, M: int) -> np.ndarray:
    """Linearly resample N rows to M rows along the row index.

    Output row j lies at template position j * (N - 1) / (M - 1), so the first and
    last rows are kept exactly.
    """
    N = rows.shape[0]
    if M == N:
        return rows.copy()
    if N == 1 or M == 1:
        return np.repeat(rows[:1], M, axis=0)
    u = np.arange(M) * (N - 1) / (M - 1)
    knots = np.arange(N)
    return np.column_stack([np.interp(u, knots, rows[:, c]) for c in range(rows.shape[1])])


def mitigate_dtw(slices: SliceSet, report: DetectionReport, library: TemplateLibrary, cfg: MitigationConfig) -> MitigationResult:
    """Overwrite every abnormal slice with its matched template, resampled to the slice length.

    Only the channels held by the library are replaced: three-channel libraries
    leave the gyroscope untouched, six-channel ones also replace it (dividing by
    the gyro weight). Timestamps, normal slices and the residual are unchanged.
    """
    if cfg.mode is not MitigationMode.TEMPLATE_SUBSTITUTION:
        raise ConfigurationError(f"DTW mitigation needs template_substitution, got '{cfg.mode.value}'")
    stream = slices.stream
    log = MitigationLog(mode=cfg.mode)
    abnormal = report.abnormal_records()
    if not abnormal:
        return MitigationResult(stream=stream.copy(), log=log)
    if report.mode is not DetectorMode.DTW:
        raise CorruptedReportError(f"Template substitution needs a dtw report, got '{report.mode.value}'")
    report.validate_against(len(stream))

    acc = stream.acc.copy()
    gyro = None if stream.gyro is None else stream.gyro.copy()
    for record in abnormal:
        if record.matched_template_id is None:
            raise CorruptedReportError(f"Abnormal slice at {record.start_index} has no matched template")
        template = library.get(record.matched_template_id)
        rows = resample_rows(template.series, record.length)
        sl = slice(record.start_index, record.stop_index)
        acc[sl] = rows[:, :3]
        replaced = ["ax", "ay", "az"]
        if library.dims == 6 and gyro is not None:
            gyro[sl] = rows[:, 3:] / library.gyro_weight
            replaced += ["gx", "gy", "gz"]
        log.changes.append(
            MitigationChange(
                start_index=record.start_index,
                end_index=record.stop_index,
                rule=cfg.mode.value,
                template_id=template.id,
                axes=replaced,
            )
        )
    logger.info(f"Template substitution replaced {len(abnormal)} slices ({log.changed_samples} samples)")
    return MitigationResult(stream=stream.replace(acc=acc, gyro=gyro), log=log)
