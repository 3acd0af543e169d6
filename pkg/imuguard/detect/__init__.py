from imuguard.detect.config import DetectorConfig
from imuguard.detect.dtw_detector import detect_dtw
from imuguard.detect.report import DetectionReport, SliceRecord
from imuguard.detect.scoring import DetectionScore, score_detection
from imuguard.detect.slicing import Slice, SliceSet, slice_stream
from imuguard.detect.templates import (
    LabeledRecording,
    Template,
    TemplateLibrary,
    calibrate_dtw_threshold,
    extract_templates,
    k_medoids,
)
from imuguard.detect.threshold import detect_threshold

__all__ = [
    "DetectionReport",
    "DetectionScore",
    "DetectorConfig",
    "LabeledRecording",
    "Slice",
    "SliceRecord",
    "SliceSet",
    "Template",
    "TemplateLibrary",
    "calibrate_dtw_threshold",
    "detect_dtw",
    "detect_threshold",
    "extract_templates",
    "k_medoids",
    "score_detection",
    "slice_stream",
]
