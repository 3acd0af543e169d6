from imuguard.utils.colorlogging import ColorLog
from imuguard.utils.parallel import resolve_parallelism

__all__ = [
    "ColorLog",
    "resolve_parallelism",
]
