"""Shared report records for distributional checks."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

__all__ = ["KSReport"]


@dataclass(frozen=True)
class KSReport:
    """Result of a two-sample Kolmogorov-Smirnov comparison."""

    statistic: float
    p_value: float
    n_samples: int
    description: str = ""

    def passed(self, alpha: float = 0.01) -> bool:
        return self.p_value > alpha

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json() + "\n")
