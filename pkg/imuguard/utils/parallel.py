from __future__ import annotations

import os

from imuguard.__init__ import console
from imuguard.constants import THREADS_ENV
from imuguard.exceptions import ConfigurationError
from imuguard.utils.colorlogging import ColorLog

logger = ColorLog(console, __name__).logger


def thread_cap() -> int | None:
    """Return the thread cap from the environment, or None when unset."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        cap = int(raw)
    except ValueError as e:
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got '{raw}'") from e
    if cap < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be a positive integer, got {cap}")
    return cap


def resolve_parallelism(requested: int) -> int:
    """Clamp a requested parallelism level to the environment cap; the CPU count is not a cap.

    Args:
        requested: Number of workers asked for by the caller.

    Returns:
        int: Effective number of workers (at least 1).
    """
    if requested < 1:
        raise ConfigurationError(f"Parallelism must be >= 1, got {requested}")
    cap = thread_cap()
    if cap is not None and requested > cap:
        logger.debug(f"Parallelism {requested} capped to {cap} by {THREADS_ENV}")
        return cap
    return requested
