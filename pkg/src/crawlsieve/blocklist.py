"""Final blocklist with subnet override, plus subnet reports."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

from .ingest import int_to_ip
from .timeline import EntityKey, Level, mask

BLOCK_LEVELS = (Level.B, Level.C, Level.IP)
METRIC_COLUMNS = (
    "active_days",
    "ave_hits_per_day",
    "span_ave_hits_per_day",
    "min_daily_hits",
    "max_daily_hits",
    "min_daily_range_min",
    "max_daily_range_min",
    "min_peak_ppm",
    "max_peak_ppm",
    "max_consecutive_days",
)
SUBNET_HEADER = ("cidr", "machines", "total_hits", "triggers") + METRIC_COLUMNS


@dataclass(frozen=True)
class BlockEntry:
    key: EntityKey
    triggers: tuple
    distinct_ips: int
    total_hits: int

    @property
    def level(self) -> Level:
        return self.key.level

    @property
    def cidr(self) -> str:
        return self.key.cidr

    def line(self) -> str:
        if self.level is Level.IP:
            return int_to_ip(self.key.value)
        return self.cidr


@dataclass(frozen=True)
class SubnetReport:
    key: EntityKey
    machines: int
    total_hits: int
    triggers: tuple
    metrics: dict
    members: tuple = ()  # (ip, hits) for /16 reports

    def row(self) -> list:
        m = self.metrics
        return [
            self.key.cidr,
            self.machines,
            self.total_hits,
            "|".join(self.triggers),
            m["active_days"],
            f"{m['ave_hits_per_day']:.2f}",
            f"{m['span_ave_hits_per_day']:.2f}",
            m["hits"][0],
            m["hits"][1],
            f"{m['effective_range_minutes'][0]:.1f}",
            f"{m['effective_range_minutes'][1]:.1f}",
            m["peak_ppm"][0],
            m["peak_ppm"][1],
            m["consecutive_run"],
        ]


def finalize(results: dict) -> list:
    """Blocked entities with anything inside a blocked coarser subnet dropped."""
    covering = {Level.B: set(), Level.C: set()}
    entries = []
    for level in BLOCK_LEVELS:
        result = results[level]
        for key, verdict in result.verdicts.items():
            if not verdict.blocked:
                continue
            if any(mask(key.value, coarse) in covering[coarse] for coarse in covering if coarse.prefix < level.prefix):
                continue
            if level in covering:
                covering[level].add(key.value)
            t = result.timelines[key]
            entries.append(BlockEntry(key, tuple(verdict.trigger_names()), t.distinct_ips, t.total_hits))
    entries.sort(key=lambda e: e.key.sort_key())
    return entries


def subnet_reports(results: dict, level: Level) -> list:
    result = results[level]
    reports = []
    for key in sorted(result.verdicts, key=EntityKey.sort_key):
        verdict = result.verdicts[key]
        if not verdict.blocked:
            continue
        t = result.timelines[key]
        metrics = dict(verdict.metrics, active_days=t.active_days)
        members = ()
        if level is Level.B:
            counts = {}
            for _, _, ip in t.visits:
                counts[ip] = counts.get(ip, 0) + 1
            members = tuple(sorted(counts.items()))
        reports.append(SubnetReport(key, t.distinct_ips, t.total_hits, tuple(verdict.trigger_names()), metrics, members))
    return reports


def blocklist_text(entries) -> str:
    return "".join(e.line() + "\n" for e in entries)


def subnet_csv(reports, with_members: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(SUBNET_HEADER) + (["members"] if with_members else [])
    writer.writerow(header)
    for r in reports:
        row = r.row()
        if with_members:
            row.append(";".join(f"{int_to_ip(ip)}:{n}" for ip, n in r.members))
        writer.writerow(row)
    return buf.getvalue()


def write_outputs(entries, results: dict, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "blocklist.txt": blocklist_text(entries),
        "subnets_c.csv": subnet_csv(subnet_reports(results, Level.C)),
        "subnets_b.csv": subnet_csv(subnet_reports(results, Level.B), with_members=True),
    }
    paths = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8", newline="")
        paths.append(path)
    return paths
