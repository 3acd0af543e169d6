import logging
import os

from rich.console import Console
from rich.logging import RichHandler

# Third-party loggers that are chatty at INFO (numba logs every compilation pass)
QUIET_LOGGERS = ("numba", "hydra", "matplotlib")

LOG_LEVEL_ENV = "IMU_GUARD_LOG_LEVEL"


class ColorLog:
    """Rich-backed logger shared by every imuguard module.

    The console handler is installed once on the root logger; later instances only
    hand out named loggers. The handler level follows ``IMU_GUARD_LOG_LEVEL``
    (default ``INFO``).

    (based on https://stackoverflow.com/a/79225597)
    """

    def __init__(self, console: Console, name: str) -> None:
        level_name = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
        level = logging.getLevelName(level_name)
        if not isinstance(level, int):
            level = logging.INFO

        root = logging.getLogger()
        if not any(isinstance(h, RichHandler) for h in root.handlers):
            # Log and progress output share the same console instance
            rich_handler = RichHandler(console=console, show_path=False)
            rich_handler.setLevel(level)
            rich_handler.setFormatter(logging.Formatter("%(message)s"))
            logging.basicConfig(
                level=logging.NOTSET,
                format="%(message)s",
                datefmt="[%X]",
                handlers=[rich_handler],
            )

        for quiet in QUIET_LOGGERS:
            logging.getLogger(quiet).setLevel(logging.WARNING)

        self.logger = logging.getLogger(name)
