from __future__ import annotations

import numpy as np

from imuguard.__init__ import console
from imuguard.constants import DetectorMode, Verdict
from imuguard.core.state import ImuStream
from imuguard.detect.config import DetectorConfig
from imuguard.detect.report import DetectionReport, SliceRecord
from imuguard.exceptions import ConfigurationError
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger

AXES = ("x", "y", "z")


def static_reference(gravity_norm: float) -> np.ndarray:
    """Accelerometer reading of a static, level sensor."""
    return np.array([0.0, 0.0, gravity_norm])


def _runs(indices: np.ndarray) -> list[np.ndarray]:
    if indices.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(indices) != 1) + 1
    return np.split(indices, breaks)


def detect_threshold(stream: ImuStream, cfg: DetectorConfig) -> DetectionReport:
    """Flag samples whose accelerometer deviates from the static reading by more than the threshold.

    A sample is abnormal iff |acc[axis] - reference[axis]| > acc_threshold on any
    axis, with reference (0, 0, |g|). Consecutive flagged samples form one record.
    """
    if cfg.mode is not DetectorMode.THRESHOLD or cfg.acc_threshold is None:
        raise ConfigurationError("detect_threshold needs a threshold-mode detector configuration")
    reference = static_reference(cfg.gravity_norm)
    exceed = np.abs(stream.acc - reference) > cfg.acc_threshold
    flagged = np.flatnonzero(exceed.any(axis=1))

    records = []
    for run in _runs(flagged):
        records.append(
            SliceRecord(
                start_index=int(run[0]),
                length=int(run.size),
                verdict=Verdict.ABNORMAL,
                flagged_sample_indices=[int(i) for i in run],
                flagged_axes=[[AXES[a] for a in np.flatnonzero(exceed[i])] for i in run],
            )
        )
    logger.info(f"Threshold detector flagged {flagged.size} of {len(stream)} samples in {len(records)} runs")
    return DetectionReport(
        mode=DetectorMode.THRESHOLD,
        stream_length=len(stream),
        threshold=float(cfg.acc_threshold),
        records=records,
        reference=reference.tolist(),
    )
