from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from imuguard.constants import DetectorMode, Verdict
from imuguard.exceptions import CorruptedReportError


@dataclass
class SliceRecord:
    """Verdict for one slice (DTW) or one run of flagged samples (threshold)."""

    start_index: int
    length: int
    verdict: Verdict
    best_distance: float | None = None
    matched_template_id: str | None = None
    flagged_sample_indices: list[int] = field(default_factory=list)
    flagged_axes: list[list[str]] = field(default_factory=list)

    @property
    def stop_index(self) -> int:
        return self.start_index + self.length

    @property
    def abnormal(self) -> bool:
        return self.verdict is Verdict.ABNORMAL


@dataclass
class DetectionReport:
    """Detector output in stream order.

    `threshold` is the acceleration threshold (threshold mode) or the DTW distance
    threshold (dtw mode); `reference` is the static accelerometer reading that
    deviations are measured from in threshold mode.
    """

    mode: DetectorMode
    stream_length: int
    threshold: float | None
    records: list[SliceRecord] = field(default_factory=list)
    reference: list[float] | None = None
    slice_len: int | None = None

    def __len__(self) -> int:
        return len(self.records)

    def abnormal_records(self) -> list[SliceRecord]:
        return [r for r in self.records if r.abnormal]

    @property
    def abnormal_count(self) -> int:
        return len(self.abnormal_records())

    def flagged_mask(self) -> np.ndarray:
        """Boolean mask of samples the detector marked abnormal."""
        mask = np.zeros(self.stream_length, dtype=bool)
        for record in self.abnormal_records():
            if self.mode is DetectorMode.THRESHOLD:
                mask[record.flagged_sample_indices] = True
            else:
                mask[record.start_index : record.stop_index] = True
        return mask

    def validate_against(self, stream_length: int) -> None:
        if self.stream_length != stream_length:
            raise CorruptedReportError(f"Report covers {self.stream_length} samples but the stream has {stream_length}")
        for record in self.records:
            if record.start_index < 0 or record.stop_index > stream_length:
                raise CorruptedReportError(f"Record [{record.start_index}, {record.stop_index}) is outside the stream of {stream_length} samples")
            if any(i < 0 or i >= stream_length for i in record.flagged_sample_indices):
                raise CorruptedReportError(f"Record at {record.start_index} flags samples outside the stream")

    def record_dicts(self) -> list[dict[str, Any]]:
        out = []
        for r in self.records:
            out.append(
                {
                    "mode": self.mode.value,
                    "stream_length": self.stream_length,
                    "threshold": self.threshold,
                    "reference": self.reference,
                    "slice_len": self.slice_len,
                    "start_index": r.start_index,
                    "length": r.length,
                    "verdict": r.verdict.value,
                    "best_distance": r.best_distance,
                    "matched_template_id": r.matched_template_id,
                    "flagged_sample_indices": r.flagged_sample_indices,
                    "flagged_axes": r.flagged_axes,
                }
            )
        return out

    def to_jsonl(self) -> str:
        """One sorted-key JSON object per record, newline terminated."""
        return "".join(json.dumps(d, sort_keys=True) + "\n" for d in self.record_dicts())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str, stream_length: int | None = None) -> DetectionReport:
        """Parse a report. An empty document is a report without findings."""
        try:
            rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        except json.JSONDecodeError as e:
            raise CorruptedReportError(f"Detection report is not valid JSONL: {e}") from e
        if not rows:
            return cls(mode=DetectorMode.NONE, stream_length=stream_length or 0, threshold=None)
        head = rows[0]
        try:
            report = cls(
                mode=DetectorMode(head["mode"]),
                stream_length=int(head["stream_length"]),
                threshold=head.get("threshold"),
                reference=head.get("reference"),
                slice_len=head.get("slice_len"),
                records=[
                    SliceRecord(
                        start_index=int(row["start_index"]),
                        length=int(row["length"]),
                        verdict=Verdict(row["verdict"]),
                        best_distance=row.get("best_distance"),
                        matched_template_id=row.get("matched_template_id"),
                        flagged_sample_indices=[int(i) for i in row.get("flagged_sample_indices", [])],
                        flagged_axes=row.get("flagged_axes", []),
                    )
                    for row in rows
                ],
            )
        except (KeyError, ValueError, TypeError) as e:
            raise CorruptedReportError(f"Malformed detection report: {e}") from e
        if any(row.get("mode") != report.mode.value for row in rows):
            raise CorruptedReportError("Detection report mixes detector modes")
        if stream_length is not None:
            report.validate_against(stream_length)
        return report

    @classmethod
    def load(cls, path: str | Path, stream_length: int | None = None) -> DetectionReport:
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"), stream_length=stream_length)
