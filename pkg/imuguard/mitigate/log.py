from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from imuguard.constants import MitigationMode
from imuguard.core.state import ImuStream


@dataclass
class MitigationChange:
    """A replaced block of samples [start_index, end_index)."""

    start_index: int
    end_index: int
    rule: str
    template_id: str | None = None
    axes: list[str] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"start_index": self.start_index, "end_index": self.end_index, "rule": self.rule}
        if self.template_id is not None:
            out["template_id"] = self.template_id
        if self.axes is not None:
            out["axes"] = self.axes
        return out


@dataclass
class MitigationLog:
    """Which samples were changed and by what rule, including moving-average fallbacks."""

    mode: MitigationMode
    changes: list[MitigationChange] = field(default_factory=list)
    fallbacks: list[dict[str, Any]] = field(default_factory=list)

    @property
    def changed_samples(self) -> int:
        return sum(c.end_index - c.start_index for c in self.changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "changes": [c.to_dict() for c in self.changes],
            "fallbacks": self.fallbacks,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1), encoding="utf-8")


@dataclass(eq=False)
class MitigationResult:
    stream: ImuStream
    log: MitigationLog
