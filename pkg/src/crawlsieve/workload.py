"""Server workload estimates and per-stage reduction accounting.

Every request is assumed to occupy the server for a fixed ``ds`` seconds.
The load sampled at minute ``m`` is the number of requests whose timestamp
falls in ``(60*m - ds, 60*m]``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .policy import Trigger
from .timeline import Level

ALLOWED = "allowed"


@dataclass(frozen=True)
class WorkloadConfig:
    ds: float = 60.0

    def __post_init__(self):
        if not self.ds > 0:
            raise ValueError("ds must be positive")


@dataclass(frozen=True)
class Stage:
    name: str
    level: Level
    trigger: Optional[Trigger]  # None: any blocking verdict at the level


STAGES = (
    Stage("Throttling", Level.IP, Trigger.SMART_THROTTLE),
    Stage("Consecutive", Level.IP, Trigger.CONSECUTIVE),
    Stage("Daily range", Level.IP, Trigger.DAILY_RANGE),
    Stage("Daily max", Level.IP, Trigger.DAILY_TOTAL),
    Stage("Robots", Level.IP, Trigger.ROBOTS),
    Stage("C Subnet", Level.C, None),
    Stage("B Subnet", Level.B, None),
)


@dataclass
class LoadSeries:
    start: int  # minute index of values[0]
    values: np.ndarray

    def at(self, minute: int) -> int:
        i = minute - self.start
        if 0 <= i < len(self.values):
            return int(self.values[i])
        return 0

    @property
    def minutes(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self.values))

    def mean(self) -> float:
        return float(self.values.mean()) if len(self.values) else 0.0


@dataclass(frozen=True)
class StageRow:
    stage: str
    workload: float
    stage_pct: Optional[float]
    cumulative_pct: Optional[float]


@dataclass
class StageAnalysis:
    rows: list
    series: dict  # label -> LoadSeries, "None" first and final stage last
    assignment: list  # per record: stage name or ALLOWED

    @property
    def cumulative_pct(self) -> float:
        return self.rows[-1].cumulative_pct or 0.0


def _timestamps(records) -> np.ndarray:
    return np.fromiter(
        (r if isinstance(r, (int, np.integer)) else r.timestamp for r in records), dtype=np.int64
    )


def series_grid(timestamps: np.ndarray, ds: float) -> tuple:
    """Minute range [start, stop) whose samples see every request."""
    if len(timestamps) == 0:
        return 0, 0
    start = int(timestamps.min()) // 60
    stop = -(-int(timestamps.max()) // 60) + math.ceil(ds / 60) + 1
    return start, stop


def load_series(records, cfg: WorkloadConfig = WorkloadConfig(), grid: Optional[tuple] = None) -> LoadSeries:
    ts = np.sort(_timestamps(records))
    start, stop = grid if grid is not None else series_grid(ts, cfg.ds)
    sample_t = np.arange(start, stop, dtype=np.float64) * 60
    hi = np.searchsorted(ts, sample_t, side="right")
    lo = np.searchsorted(ts, sample_t - cfg.ds, side="right")
    return LoadSeries(start, (hi - lo).astype(np.int64))


def assign_stages(records, results: dict, stages: Sequence[Stage] = STAGES) -> list:
    """Name of the first stage that removes each record, or ``ALLOWED``."""
    ip_result = results[Level.IP]
    ip_stage = {}
    for key, verdict in ip_result.verdicts.items():
        for stage in stages:
            if stage.level is Level.IP and stage.trigger in verdict.triggers:
                ip_stage[key.value] = stage.name
                break
    subnet_stage = []
    for stage in stages:
        if stage.level is Level.IP:
            continue
        blocked = {k.value for k, v in results[stage.level].verdicts.items() if v.blocked}
        subnet_stage.append((stage.name, stage.level.netmask, blocked))

    out = []
    for r in records:
        name = ip_stage.get(r.ip)
        if name is None:
            for stage_name, netmask, blocked in subnet_stage:
                if r.ip & netmask in blocked:
                    name = stage_name
                    break
        out.append(name or ALLOWED)
    return out


def stage_table(records, results: dict, cfg: WorkloadConfig = WorkloadConfig(),
                stages: Sequence[Stage] = STAGES) -> StageAnalysis:
    assignment = assign_stages(records, results, stages)
    ts = _timestamps(records)
    grid = series_grid(ts, cfg.ds)
    removed_at = {s.name: i + 1 for i, s in enumerate(stages)}
    # record i survives stages 0..order[i]-1
    order = np.array([removed_at.get(a, len(stages) + 1) for a in assignment], dtype=np.int64)

    series = {"None": load_series(ts, cfg, grid)}
    baseline = series["None"].mean()
    rows = [StageRow("None", baseline, None, None)]
    prev = baseline
    for i, stage in enumerate(stages, 1):
        s = load_series(ts[order > i], cfg, grid)
        series[stage.name] = s
        cur = s.mean()
        if baseline > 0:
            rows.append(StageRow(stage.name, cur, 100 * (prev - cur) / baseline, 100 * (baseline - cur) / baseline))
        else:
            rows.append(StageRow(stage.name, cur, 0.0, 0.0))
        prev = cur
    return StageAnalysis(rows, series, assignment)


def format_table(rows) -> str:
    lines = [f"{'Filter':<12} {'Workload':>10} {'Stage %':>8} {'Cumulative %':>13}"]
    for r in rows:
        stage = "" if r.stage_pct is None else f"{r.stage_pct:.1f}%"
        cum = "" if r.cumulative_pct is None else f"{r.cumulative_pct:.1f}%"
        lines.append(f"{r.stage:<12} {r.workload:>10.3f} {stage:>8} {cum:>13}")
    return "\n".join(lines)


def workload_csv(analysis: StageAnalysis) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    labels = list(analysis.series)
    writer.writerow(["minute", "baseline"] + [f"after_{_slug(n)}" for n in labels[1:]] + ["final"])
    base = analysis.series["None"]
    final = analysis.series[labels[-1]]
    columns = [analysis.series[n].values for n in labels]
    for i, minute in enumerate(base.minutes):
        writer.writerow([int(minute)] + [int(c[i]) for c in columns] + [int(final.values[i])])
    return buf.getvalue()


def read_workload_csv(text: str) -> tuple:
    """Inverse of :func:`workload_csv`: (start minute, {column: values})."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = [list(map(int, row)) for row in reader]
    data = np.array(rows, dtype=np.int64).reshape(len(rows), len(header))
    start = int(data[0, 0]) if len(rows) else 0
    return start, {name: data[:, j] for j, name in enumerate(header) if j > 0}


def _slug(name: str) -> str:
    return name.lower().replace(" ", "_")


def level_of_stage(name: str) -> Optional[Level]:
    for s in STAGES:
        if s.name == name:
            return s.level
    return None

