"""Behavioral blocking policies and per-entity scoring."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .timeline import EntityKey, EntityTimeline, Level


@dataclass(frozen=True)
class PolicyParams:
    """Blocking thresholds. Lower values block more aggressively."""

    min_ip_b: int = 1024
    min_ip_c: int = 3
    max_ip_c: int = 80
    max_robot: int = 10
    max_daily: int = 100
    max_daily_range: float = 360
    max_consec_days: int = 5
    max_consec_range: float = 240
    max_daily_ave: float = 40
    max_daily_ppm: int = 40

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive, got {getattr(self, f.name)!r}")

    @classmethod
    def names(cls) -> tuple:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "PolicyParams":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - set(types))
        if unknown:
            raise KeyError(f"unknown policy parameter(s): {', '.join(unknown)}")
        parsed = {}
        for name, raw in values.items():
            conv = int if types[name] in (int, "int") else float
            try:
                parsed[name] = conv(raw)
            except ValueError:
                raise ValueError(f"{name}: expected a number, got {raw!r}") from None
        return cls(**parsed)

    @classmethod
    def from_file(cls, path) -> "PolicyParams":
        from .config import read_key_values

        return cls.from_mapping(read_key_values(path))


class Trigger(str, enum.Enum):
    SMART_THROTTLE = "SmartThrottle"
    DAILY_TOTAL = "DailyTotal"
    DAILY_RANGE = "DailyRange"
    CONSECUTIVE = "Consecutive"
    ROBOTS = "Robots"
    SUBNET_COUNT = "SubnetCount"

    def __str__(self):
        return self.value


TRIGGER_ORDER = tuple(Trigger)


@dataclass(frozen=True)
class Verdict:
    key: EntityKey
    blocked: bool
    triggers: frozenset = frozenset()
    metrics: dict = field(default_factory=dict, compare=False)

    def trigger_names(self) -> list:
        return [t.value for t in TRIGGER_ORDER if t in self.triggers]


def eval_smart_throttle(t: EntityTimeline, p: PolicyParams) -> Optional[Trigger]:
    peak = max(d.peak_ppm for d in t.days)
    if t.ave_hits_per_day > p.max_daily_ave and peak > p.max_daily_ppm:
        return Trigger.SMART_THROTTLE
    return None


def eval_daily_total(t: EntityTimeline, p: PolicyParams) -> Optional[Trigger]:
    if any(d.hits > p.max_daily for d in t.days):
        return Trigger.DAILY_TOTAL
    return None


def eval_daily_range(t: EntityTimeline, p: PolicyParams) -> Optional[Trigger]:
    if any(d.effective_range_minutes > p.max_daily_range for d in t.days):
        return Trigger.DAILY_RANGE
    return None


def consecutive_run(t: EntityTimeline, p: PolicyParams) -> int:
    return t.max_consecutive_run(lambda d: d.effective_range_minutes > p.max_consec_range)


def eval_consecutive(t: EntityTimeline, p: PolicyParams) -> Optional[Trigger]:
    if consecutive_run(t, p) > p.max_consec_days:
        return Trigger.CONSECUTIVE
    return None


def is_robots_page(page: Optional[str]) -> bool:
    if not page:
        return False
    path = page.split("?", 1)[0].split("#", 1)[0]
    return path.rsplit("/", 1)[-1] == "robots.txt"


def eval_robots(t: EntityTimeline, p: PolicyParams) -> Optional[Trigger]:
    """A visitor that asked for robots.txt is a self-declared crawler.

    It is tolerated up to ``max_robot`` hits in total.
    """
    if t.total_hits > p.max_robot and any(is_robots_page(page) for _, page, _ in t.visits):
        return Trigger.ROBOTS
    return None


def subnet_eligible(t: EntityTimeline, p: PolicyParams) -> bool:
    if t.key.level is Level.C:
        return t.distinct_ips >= p.min_ip_c
    if t.key.level is Level.B:
        return t.distinct_ips >= p.min_ip_b
    return t.key.level is Level.IP


def eval_subnet_count(t: EntityTimeline, p: PolicyParams) -> Optional[Trigger]:
    if t.key.level is Level.C and t.distinct_ips > p.max_ip_c:
        return Trigger.SUBNET_COUNT
    return None


BEHAVIORAL = (eval_smart_throttle, eval_daily_total, eval_daily_range, eval_consecutive)


def daily_metrics(t: EntityTimeline, p: PolicyParams) -> dict:
    out = {}
    for name in ("hits", "effective_range_minutes", "peak_ppm"):
        values = [getattr(d, name) for d in t.days]
        out[name] = (min(values), max(values))
    out["ave_hits_per_day"] = t.ave_hits_per_day
    out["span_ave_hits_per_day"] = t.span_ave_hits_per_day
    out["consecutive_run"] = consecutive_run(t, p)
    return out


def score(t: EntityTimeline, p: PolicyParams) -> Verdict:
    level = t.key.level
    metrics = daily_metrics(t, p)
    if level is Level.A:
        return Verdict(t.key, False, frozenset(), metrics)
    checks = []
    if subnet_eligible(t, p):
        checks.extend(BEHAVIORAL)
    if level is Level.IP:
        checks.append(eval_robots)
    if level is Level.C:
        checks.append(eval_subnet_count)
    triggers = frozenset(tr for tr in (check(t, p) for check in checks) if tr is not None)
    return Verdict(t.key, bool(triggers), triggers, metrics)
