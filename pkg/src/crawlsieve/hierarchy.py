"""Hash-sort-metric-score at every subnet level.

Each level is built from all records, not only from traffic that survived
the finer levels; which stage removed what is worked out later in
:mod:`crawlsieve.workload`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .policy import PolicyParams, score
from .timeline import LEVELS, Level, build_timelines


@dataclass
class LevelResult:
    level: Level
    timelines: dict
    verdicts: dict = field(default_factory=dict)

    def blocked(self) -> list:
        return [v for v in self.verdicts.values() if v.blocked]


def run_level(records, level: Level, params: PolicyParams) -> LevelResult:
    timelines = build_timelines(records, level)
    if level is Level.A:
        # /8 groups are kept for completeness and never scored
        return LevelResult(level, timelines)
    verdicts = {key: score(t, params) for key, t in timelines.items()}
    return LevelResult(level, timelines, verdicts)


def run_hierarchy(records, params: PolicyParams) -> dict:
    return {level: run_level(records, level, params) for level in LEVELS}
