from imuguard.evaluation.alignment import AlignmentTransform, align, umeyama
from imuguard.evaluation.association import PosePairs, associate
from imuguard.evaluation.metrics import MetricReport, RelativeErrorStats, ate_rmse, evaluate, relative_errors

__all__ = [
    "AlignmentTransform",
    "MetricReport",
    "PosePairs",
    "RelativeErrorStats",
    "align",
    "associate",
    "ate_rmse",
    "evaluate",
    "relative_errors",
    "umeyama",
]
