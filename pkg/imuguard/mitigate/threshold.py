from __future__ import annotations

import numpy as np

from imuguard.__init__ import console
from imuguard.constants import AXIS_INDEX, DetectorMode, MitigationMode
from imuguard.core.state import ImuStream
from imuguard.detect.report import DetectionReport
from imuguard.exceptions import ConfigurationError, CorruptedReportError
from imuguard.mitigate.config import MitigationConfig
from imuguard.mitigate.log import MitigationChange, MitigationLog, MitigationResult
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger

AXES = ("x", "y", "z")


def _flag_matrix(report: DetectionReport, n: int) -> np.ndarray:
    """(n, 3) mask of flagged sample axes."""
    flags = np.zeros((n, 3), dtype=bool)
    for record in report.abnormal_records():
        if record.flagged_axes and len(record.flagged_axes) != len(record.flagged_sample_indices):
            raise CorruptedReportError(f"Record at {record.start_index} lists axes for {len(record.flagged_axes)} of {len(record.flagged_sample_indices)} samples")
        for pos, idx in enumerate(record.flagged_sample_indices):
            axes = record.flagged_axes[pos] if record.flagged_axes else AXES
            for axis in axes:
                if axis not in AXIS_INDEX:
                    raise CorruptedReportError(f"Unknown axis '{axis}' in record at {record.start_index}")
                flags[idx, AXIS_INDEX[axis]] = True
    return flags


def mitigate_threshold(stream: ImuStream, report: DetectionReport, cfg: MitigationConfig) -> MitigationResult:
    """Replace flagged accelerometer values.

    clamp sets the value to reference +/- threshold on the side of the deviation.
    moving_average uses the mean of up to `window_n` preceding values of that axis
    that were not flagged, and falls back to clamp when there are none. Unflagged
    values and timestamps are copied unchanged.
    """
    if cfg.mode not in (MitigationMode.CLAMP, MitigationMode.MOVING_AVERAGE):
        raise ConfigurationError(f"Threshold mitigation supports clamp or moving_average, got '{cfg.mode.value}'")
    log = MitigationLog(mode=cfg.mode)
    if not report.abnormal_records():
        return MitigationResult(stream=stream.copy(), log=log)
    if report.mode is not DetectorMode.THRESHOLD:
        raise CorruptedReportError(f"Threshold mitigation needs a threshold report, got '{report.mode.value}'")
    report.validate_against(len(stream))
    if report.threshold is None or report.reference is None:
        raise CorruptedReportError("Threshold report lacks its threshold or static reference")

    threshold = float(report.threshold)
    reference = np.asarray(report.reference, dtype=np.float64)
    flags = _flag_matrix(report, len(stream))
    acc = stream.acc.copy()
    original = stream.acc

    def clamp(i: int, a: int) -> float:
        deviation = original[i, a] - reference[a]
        return float(reference[a] + np.copysign(threshold, deviation))

    for a in range(3):
        flagged = np.flatnonzero(flags[:, a])
        if flagged.size == 0:
            continue
        clean = np.flatnonzero(~flags[:, a])
        for i in flagged:
            if cfg.mode is MitigationMode.CLAMP:
                acc[i, a] = clamp(i, a)
                continue
            pos = int(np.searchsorted(clean, i))
            window = clean[max(0, pos - cfg.window_n) : pos]
            if window.size == 0:
                acc[i, a] = clamp(i, a)
                log.fallbacks.append({"index": int(i), "axis": AXES[a], "rule": MitigationMode.CLAMP.value})
            else:
                acc[i, a] = float(original[window, a].mean())

    for record in report.abnormal_records():
        axes = sorted({AXES[a] for idx in record.flagged_sample_indices for a in np.flatnonzero(flags[idx])})
        log.changes.append(MitigationChange(start_index=record.start_index, end_index=record.stop_index, rule=cfg.mode.value, axes=axes))
    if log.fallbacks:
        logger.warning(f"Moving average had no clean history for {len(log.fallbacks)} values; clamped instead")
    logger.info(f"Threshold mitigation ({cfg.mode.value}) changed {log.changed_samples} samples")
    return MitigationResult(stream=stream.replace(acc=acc), log=log)
