from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from imuguard.constants import DetectorMode, Verdict
from imuguard.detect.report import DetectionReport
from imuguard.exceptions import ShapeError


@dataclass(frozen=True)
class DetectionScore:
    """Confusion counts of a detector against the true fault mask.

    DTW reports are scored per slice (a slice is faulty iff it contains a corrupted
    sample); threshold reports are scored per sample.
    """

    unit: str
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int

    @property
    def recall(self) -> float | None:
        positives = self.true_positives + self.false_negatives
        return self.true_positives / positives if positives else None

    @property
    def false_positive_rate(self) -> float | None:
        negatives = self.false_positives + self.true_negatives
        return self.false_positives / negatives if negatives else None

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["recall"] = self.recall
        out["false_positive_rate"] = self.false_positive_rate
        return out


def _counts(truth: np.ndarray, predicted: np.ndarray, unit: str) -> DetectionScore:
    return DetectionScore(
        unit=unit,
        true_positives=int(np.sum(truth & predicted)),
        false_positives=int(np.sum(~truth & predicted)),
        false_negatives=int(np.sum(truth & ~predicted)),
        true_negatives=int(np.sum(~truth & ~predicted)),
    )


def score_detection(report: DetectionReport, fault_mask: np.ndarray) -> DetectionScore:
    """Recall and false-positive rate of a report given the corrupted-sample mask."""
    fault_mask = np.asarray(fault_mask, dtype=bool)
    if fault_mask.shape != (report.stream_length,):
        raise ShapeError(f"Fault mask has shape {fault_mask.shape}, report covers {report.stream_length} samples")
    if report.mode is DetectorMode.DTW:
        scored = [r for r in report.records if r.verdict is not Verdict.UNPROCESSED]
        truth = np.array([fault_mask[r.start_index : r.stop_index].any() for r in scored], dtype=bool)
        predicted = np.array([r.abnormal for r in scored], dtype=bool)
        return _counts(truth, predicted, "slice")
    return _counts(fault_mask, report.flagged_mask(), "sample")
