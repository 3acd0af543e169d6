from __future__ import annotations

import shutil

from rich.console import Console

# Get terminal width, default to 175 if not available
terminal_width = shutil.get_terminal_size(fallback=(175, 24)).columns

console = Console(width=terminal_width)

__version__ = "0.3.0"
