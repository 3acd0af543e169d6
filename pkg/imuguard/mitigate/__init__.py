from imuguard.mitigate.config import MitigationConfig
from imuguard.mitigate.log import MitigationChange, MitigationLog, MitigationResult
from imuguard.mitigate.template import mitigate_dtw, resample_rows
from imuguard.mitigate.threshold import mitigate_threshold

__all__ = [
    "MitigationChange",
    "MitigationConfig",
    "MitigationLog",
    "MitigationResult",
    "mitigate_dtw",
    "mitigate_threshold",
    "resample_rows",
]
