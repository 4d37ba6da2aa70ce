"""Entity hashing, time sorting and per-day binning of visits."""

from __future__ import annotations

import datetime as dt
import enum
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .ingest import int_to_ip

SECONDS_PER_DAY = 86400
EPOCH = dt.date(1970, 1, 1)


class Level(enum.Enum):
    IP = 32
    C = 24
    B = 16
    A = 8

    @property
    def prefix(self) -> int:
        return self.value

    @property
    def netmask(self) -> int:
        return (0xFFFFFFFF << (32 - self.value)) & 0xFFFFFFFF


LEVELS = (Level.IP, Level.C, Level.B, Level.A)


def mask(ip: int, level: Level) -> int:
    return ip & level.netmask


@dataclass(frozen=True)
class EntityKey:
    level: Level
    value: int

    def __post_init__(self):
        if self.value & ~self.level.netmask & 0xFFFFFFFF:
            raise ValueError(f"host bits set in {self.value:#x} for /{self.level.prefix}")

    @classmethod
    def of(cls, ip: int, level: Level) -> "EntityKey":
        return cls(level, mask(ip, level))

    @property
    def cidr(self) -> str:
        return f"{int_to_ip(self.value)}/{self.level.prefix}"

    def contains(self, ip: int) -> bool:
        return mask(ip, self.level) == self.value

    def sort_key(self):
        return (self.value, self.level.prefix)

    def __str__(self):
        return self.cidr


@dataclass(frozen=True)
class DayStats:
    date: dt.date
    hits: int
    first: int
    last: int
    largest_gap: int
    effective_range_minutes: float
    peak_ppm: int


def day_stats(timestamps: Sequence[int]) -> DayStats:
    """Daily metrics for one calendar day of sorted hit times.

    The effective range is the first-to-last span minus the largest gap
    between successive hits, so a visitor active late in the evening and
    again early the same morning is measured by the two short bursts, not
    by the whole day.
    """
    if not timestamps:
        raise ValueError("day_stats needs at least one timestamp")
    day = timestamps[0] // SECONDS_PER_DAY
    first = timestamps[0] - day * SECONDS_PER_DAY
    last = timestamps[-1] - day * SECONDS_PER_DAY
    largest_gap = 0
    peak = 0
    run = 0
    prev = None
    prev_minute = None
    for t in timestamps:
        if prev is not None and t - prev > largest_gap:
            largest_gap = t - prev
        minute = t // 60
        run = run + 1 if minute == prev_minute else 1
        if run > peak:
            peak = run
        prev, prev_minute = t, minute
    effective = max(0.0, ((last - first) - largest_gap) / 60)
    return DayStats(
        date=EPOCH + dt.timedelta(days=day),
        hits=len(timestamps),
        first=first,
        last=last,
        largest_gap=largest_gap,
        effective_range_minutes=effective,
        peak_ppm=peak,
    )


@dataclass
class EntityTimeline:
    key: EntityKey
    days: list
    distinct_ips: int
    visits: list  # (timestamp, page, member ip), time-sorted

    @property
    def total_hits(self) -> int:
        return len(self.visits)

    @property
    def active_days(self) -> int:
        return len(self.days)

    @property
    def span_days(self) -> int:
        return (self.days[-1].date - self.days[0].date).days + 1

    @property
    def ave_hits_per_day(self) -> float:
        return self.total_hits / len(self.days)

    @property
    def span_ave_hits_per_day(self) -> float:
        """Average over the calendar span including silent days (audit only)."""
        return self.total_hits / self.span_days

    @property
    def member_ips(self) -> list:
        return sorted({ip for _, _, ip in self.visits})

    def max_consecutive_run(self, predicate: Callable[[DayStats], bool]) -> int:
        best = run = 0
        prev = None
        for d in self.days:
            if not predicate(d):
                run = 0
            elif prev is not None and run and (d.date - prev).days == 1:
                run += 1
            else:
                run = 1
            prev = d.date
            best = max(best, run)
        return best


def _bin_days(timestamps: list) -> list:
    days = []
    start = 0
    for i in range(1, len(timestamps) + 1):
        if i == len(timestamps) or timestamps[i] // SECONDS_PER_DAY != timestamps[start] // SECONDS_PER_DAY:
            days.append(day_stats(timestamps[start:i]))
            start = i
    return days


def build_timeline(key: EntityKey, visits: list) -> EntityTimeline:
    times = [v[0] for v in visits]
    return EntityTimeline(
        key=key,
        days=_bin_days(times),
        distinct_ips=len({v[2] for v in visits}),
        visits=visits,
    )


def build_timelines(records: Iterable, level: Level) -> dict:
    """Group time-sorted records by masked address and bin each group by day."""
    groups = defaultdict(list)
    netmask = level.netmask
    for r in records:
        groups[r.ip & netmask].append((r.timestamp, r.page, r.ip))
    return {
        EntityKey(level, value): build_timeline(EntityKey(level, value), visits)
        for value, visits in sorted(groups.items())
    }
