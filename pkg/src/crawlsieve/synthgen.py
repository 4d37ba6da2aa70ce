"""Labeled synthetic access logs with known crawler signatures.

Each bot region reproduces one row of the access-pattern taxonomy (daily
frequency, multi-day behavior, daily range, IP usage). Human visitors are
short daytime sessions that never run more than five days in a row.

All randomness comes from ``random.Random`` seeded with a string derived
from the user seed and the region id, so adding or removing a region does
not perturb the others.
"""

from __future__ import annotations

import calendar
import csv
import io
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .ingest import AccessRecord, compile_format, int_to_ip, ip_to_int, render_record

GENERATOR_FORMAT = '{X.X.X.X} - - [{DD/MMM/YYYY}:{HH:MM:SS} +0000] "{GET} {PAGE} HTTP/1.1" {RETURN} {BYTES}'
START = calendar.timegm((2025, 1, 6, 0, 0, 0))
DAYS = 20
DAY = 86400
HOUR = 3600
MINUTE = 60

HUMAN = "human"


@dataclass(frozen=True)
class RegionSpec:
    region: str
    daily_frequency: str
    multi_day: str
    daily_range: str
    ip_usage: str

    @property
    def label(self) -> str:
        return f"bot:{self.region}"


REGIONS = {
    r.region: r
    for r in (
        RegionSpec("A", "rapid, repetitive", "consecutive", "24 hr/day", "single"),
        RegionSpec("B", "infrequent, regular", "consecutive", "24 hr/day", "single"),
        RegionSpec("C", "scattered, consistent", "consecutive", "24 hr/day", "single"),
        RegionSpec("D", "rapid, repetitive", "single day", ">10 hr/day", "single"),
        RegionSpec("E", "scattered, frequent", "consecutive", "20-24 hr/day", "single"),
        RegionSpec("F", "rapid, repetitive", "consecutive", "3 hr/day, shifting", "single"),
        RegionSpec("G", "rapid, repetitive", "consecutive", "24 hr/day", "multiple IPs, narrow"),
        RegionSpec("H", "rapid, repetitive", "consecutive", ">18 hr/day", "multiple IPs, wide"),
        RegionSpec("I", "rapid, repetitive", "consecutive", "8-12 hr/day", "multiple IPs, wide"),
        RegionSpec("J", "short term", "single day", "<4 hr/day", "full IP range"),
    )
}

# Fixed addresses for the bot regions keep fixtures easy to reason about.
A_IP = "45.33.17.200"
B_IP = "66.249.70.12"
C_IP = "157.55.39.40"
D_IPS = ("52.14.80.7", "52.88.3.19", "18.222.5.61")
D_DAYS = (3, 9, 15)
E_IP = "114.119.130.5"
F_IP = "85.208.96.210"
G_SUBNETS = (("47.76.35.0", 40), ("47.76.99.0", 60), ("47.79.12.0", 90))
G_HITS_PER_DAY = 360
H_SUBNET, H_MACHINES = "20.171.0.0", 1100
I_SUBNET, I_MACHINES = "43.130.0.0", 1050
J_DAY = 11
J_HITS = 1500

A_PERIOD = 45
A_BURSTS_PER_DAY = 6
A_BURST_SIZE = 55
B_PERIOD = 30 * MINUTE
C_HITS_PER_DAY = 80
E_HITS_PER_DAY = 500
D_PERIOD = 10
F_HITS_PER_DAY = 225
F_WINDOW = 3 * HOUR

HUMAN_MAX_RUN = 5
HUMAN_MAX_DAILY_HITS = 90
HUMAN_SESSION_MINUTES = (5, 75)
HUMAN_SESSION_GAP = HOUR
HUMAN_MAX_CLICK_GAP = 10 * MINUTE

RESERVED_FIRST_OCTETS = {0, 10, 127} | set(range(224, 256))

PAGES = tuple(f"/data/site{n:03d}.html" for n in range(200)) + (
    "/", "/about.html", "/programs.html", "/data/lake.html", "/data/streams.html",
)
HUMAN_PAGES = PAGES[-5:] + PAGES[:20]
PLATFORMS = ("Mozilla/5.0", "curl/8.5", "python-requests/2.31")


@dataclass
class LabeledCorpus:
    lines: list
    labels: list
    records: list = field(repr=False, default_factory=list)

    def write(self, out_dir) -> tuple:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        log_path = out / "corpus.log"
        log_path.write_text("".join(line + "\n" for line in self.lines), encoding="utf-8", newline="")
        labels_path = out / "labels.csv"
        labels_path.write_text(labels_csv(self.labels), encoding="utf-8", newline="")
        return log_path, labels_path


def labels_csv(labels) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["line", "label"])
    for i, label in enumerate(labels, 1):
        writer.writerow([i, label])
    return buf.getvalue()


def read_labels(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return [row[1] for row in reader]


def _subnet_hosts(base: str, count: int, first: int = 10) -> list:
    net = ip_to_int(base)
    return [net + first + i for i in range(count)]


def _wide_hosts(base: str, count: int) -> list:
    """``count`` hosts spread round-robin across the 256 /24s of a /16."""
    net = ip_to_int(base)
    return [net + ((j % 256) << 8) + 1 + j // 256 for j in range(count)]


def _day_start(day: int) -> int:
    return START + day * DAY


def _clip_day(day: int, times: Iterable[float]) -> list:
    lo = _day_start(day)
    return [int(t) for t in times if lo <= int(t) < lo + DAY]


def _region_a(rng, days):
    ip = ip_to_int(A_IP)
    for d in range(days):
        base = _day_start(d)
        times = [base + k * A_PERIOD + rng.randint(0, A_PERIOD - 1) for k in range(DAY // A_PERIOD)]
        for _ in range(A_BURSTS_PER_DAY):
            minute = base + rng.randrange(DAY // MINUTE) * MINUTE
            times.extend(minute + rng.randrange(MINUTE) for _ in range(A_BURST_SIZE))
        for t in _clip_day(d, times):
            yield t, ip, rng.choice(PAGES)


def _region_b(rng, days):
    ip = ip_to_int(B_IP)
    offset = rng.randrange(B_PERIOD)
    for d in range(days):
        base = _day_start(d)
        yield base + rng.randrange(HOUR), ip, "/robots.txt"
        times = [base + offset + k * B_PERIOD + rng.randint(-60, 60) for k in range(DAY // B_PERIOD)]
        for t in _clip_day(d, times):
            yield t, ip, rng.choice(PAGES)


def _region_c(rng, days):
    ip = ip_to_int(C_IP)
    for d in range(days):
        base = _day_start(d)
        yield base + rng.randrange(DAY), ip, "/robots.txt"
        for _ in range(C_HITS_PER_DAY):
            yield base + rng.randrange(DAY), ip, rng.choice(PAGES)


def _region_d(rng, days):
    for ip_text, d in zip(D_IPS, D_DAYS):
        if d >= days:
            continue
        ip = ip_to_int(ip_text)
        start = _day_start(d) + 6 * HOUR + rng.randrange(2 * HOUR)
        for k in range(12 * HOUR // D_PERIOD):
            yield start + k * D_PERIOD + rng.randrange(D_PERIOD), ip, rng.choice(PAGES)


def _region_e(rng, days):
    ip = ip_to_int(E_IP)
    for d in range(days):
        length = rng.randint(20 * HOUR, DAY - 1)
        lo = _day_start(d) + rng.randint(0, DAY - 1 - length)
        for _ in range(E_HITS_PER_DAY):
            yield lo + rng.randrange(length), ip, rng.choice(PAGES)


def _region_f(rng, days):
    ip = ip_to_int(F_IP)
    step = F_WINDOW // F_HITS_PER_DAY
    for d in range(days):
        # the active window drifts 70 minutes later every day
        offset = (d * 70 * MINUTE) % (DAY - F_WINDOW)
        start = _day_start(d) + offset
        for k in range(F_HITS_PER_DAY):
            yield start + k * step + rng.randrange(step), ip, rng.choice(PAGES)


def _region_g(rng, days):
    for base, machines in G_SUBNETS:
        hosts = _subnet_hosts(base, machines)
        slot = DAY // machines
        per_ip = max(1, G_HITS_PER_DAY // machines)
        step = slot // per_ip
        for d in range(days):
            for i, ip in enumerate(hosts):
                start = _day_start(d) + i * slot
                for k in range(per_ip):
                    yield start + k * step + rng.randrange(step), ip, rng.choice(PAGES)


def _wide_region(rng, days, base, machines, first_hour, spread_hours, slot, hit_prob):
    hosts = _wide_hosts(base, machines)
    for d in range(days):
        day0 = _day_start(d)
        for ip in hosts:
            c = (ip >> 8) & 0xFF
            lo = day0 + first_hour * HOUR + c * spread_hours * HOUR // 256
            n = int(hit_prob) + (rng.random() < hit_prob % 1)
            for _ in range(n):
                yield lo + rng.randrange(slot), ip, rng.choice(PAGES)


def _region_h(rng, days):
    yield from _wide_region(rng, days, H_SUBNET, H_MACHINES, 2, 20, 2 * HOUR, 1.25)


def _region_i(rng, days):
    yield from _wide_region(rng, days, I_SUBNET, I_MACHINES, 8, 8, 2 * HOUR, 0.6)


def reserved_slash16() -> set:
    nets = [A_IP, B_IP, C_IP, E_IP, F_IP, H_SUBNET, I_SUBNET, *D_IPS, *(b for b, _ in G_SUBNETS)]
    return {ip_to_int(n) >> 16 for n in nets}


class _AddressPool:
    """Random public-looking addresses, one per /24, clear of the bot subnets."""

    def __init__(self):
        self.reserved = reserved_slash16()
        self.used = set()

    def draw(self, rng) -> int:
        while True:
            ip = rng.getrandbits(32)
            if ip >> 24 in RESERVED_FIRST_OCTETS or ip >> 16 in self.reserved or ip >> 8 in self.used:
                continue
            self.used.add(ip >> 8)
            return ip


def _region_j(rng, days, pool):
    if J_DAY >= days:
        return
    lo = _day_start(J_DAY) + 13 * HOUR
    for _ in range(J_HITS):
        yield lo + rng.randrange(2 * HOUR), pool.draw(rng), rng.choice(PAGES[:50])


GENERATORS = {
    "A": _region_a, "B": _region_b, "C": _region_c, "D": _region_d, "E": _region_e,
    "F": _region_f, "G": _region_g, "H": _region_h, "I": _region_i,
}


def human_active_days(rng, days: int) -> list:
    p = rng.uniform(0.3, 0.7)
    active = []
    run = 0
    for d in range(days):
        if run < HUMAN_MAX_RUN and rng.random() < p:
            active.append(d)
            run += 1
        else:
            run = 0
    return active


def human_day(rng, day: int) -> list:
    """Hit times for one person on one day: one or two daytime sessions."""
    day0 = _day_start(day)
    sessions = []
    start = int(rng.triangular(8, 21, 14) * HOUR)
    for _ in range(2 if rng.random() < 0.35 else 1):
        length = rng.randint(*HUMAN_SESSION_MINUTES) * MINUTE
        end = min(start + length, DAY - 1)
        if start >= DAY - 1:
            break
        sessions.append((start, end))
        start = end + HUMAN_SESSION_GAP + rng.randrange(3 * HOUR)
    times = []
    for lo, hi in sessions:
        t = lo
        while t <= hi and len(times) < HUMAN_MAX_DAILY_HITS:
            times.append(day0 + t)
            t += min(HUMAN_MAX_CLICK_GAP, 20 + int(rng.expovariate(1 / 150)))
    return times


def _humans(rng, count, days, pool):
    for _ in range(count):
        ip = pool.draw(rng)
        for d in human_active_days(rng, days):
            for t in human_day(rng, d):
                yield t, ip, rng.choice(HUMAN_PAGES)


def _record(rng, t, ip, page) -> AccessRecord:
    return AccessRecord(
        timestamp=t,
        ip=ip,
        ip_text=int_to_ip(ip),
        page=page,
        method="GET" if rng.random() < 0.95 else "HEAD",
        status=200 if rng.random() < 0.97 else 404,
        bytes=rng.randint(200, 60000),
        client="-",
        platform=rng.choice(PLATFORMS),
        numbers=(),
    )


def parse_regions(text: Optional[str]) -> list:
    if not text:
        return []
    if text.strip().upper() == "ALL":
        return list(REGIONS)
    names = [p.strip().upper() for p in text.split(",") if p.strip()]
    bad = [n for n in names if n not in REGIONS]
    if bad:
        raise ValueError(f"unknown region(s): {', '.join(bad)}")
    return names


def generate(regions, human_sessions: int = 50, seed: int = 0, days: int = DAYS,
             log_format: str = GENERATOR_FORMAT) -> LabeledCorpus:
    """Build a time-sorted labeled corpus.

    ``regions`` holds region ids or :class:`RegionSpec` objects;
    ``human_sessions`` is the number of distinct human visitors.
    """
    spec = compile_format(log_format)
    ids = sorted({r.region if isinstance(r, RegionSpec) else r for r in regions})
    pool = _AddressPool()
    rng = random.Random(f"{seed}/{HUMAN}")
    events = [(t, ip, page, HUMAN) for t, ip, page in _humans(rng, human_sessions, days, pool)]
    for region in ids:
        rng = random.Random(f"{seed}/{region}")
        label = REGIONS[region].label
        gen = _region_j(rng, days, pool) if region == "J" else GENERATORS[region](rng, days)
        events.extend((t, ip, page, label) for t, ip, page in gen)
    events.sort(key=lambda e: (e[0], e[1]))

    rng = random.Random(f"{seed}/fields")
    records = [_record(rng, t, ip, page) for t, ip, page, _ in events]
    lines = [render_record(spec, r) for r in records]
    return LabeledCorpus(lines, [e[3] for e in events], records)
