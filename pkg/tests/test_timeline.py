from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crawlsieve.ingest import ip_to_int
from crawlsieve.timeline import EntityKey, Level, build_timelines, day_stats, mask

from conftest import DAY0, at, every, recs


def naive_day_stats(times):
    """Reference day metrics straight from the definitions."""
    times = sorted(times)
    gaps = [b - a for a, b in zip(times, times[1:])]
    largest = max(gaps, default=0)
    span = times[-1] - times[0]
    per_minute = Counter(t // 60 for t in times)
    return {
        "hits": len(times),
        "largest_gap": largest,
        "effective_range_minutes": max(0, span - largest) / 60,
        "peak_ppm": max(per_minute.values()),
    }


def test_three_hits_across_the_day():
    # span 23:40 minus the 17:50 gap between 06:00 and 23:50
    s = day_stats([at(0, "00:10"), at(0, "06:00"), at(0, "23:50")])
    assert s.first == 10 * 60
    assert s.last == 23 * 3600 + 50 * 60
    assert s.largest_gap == 17 * 3600 + 50 * 60
    assert s.effective_range_minutes == 350
    assert s.hits == 3


def test_single_hit():
    s = day_stats([at(0, "12:00")])
    assert s.effective_range_minutes == 0
    assert s.peak_ppm == 1
    assert s.largest_gap == 0


def test_peak_per_minute():
    s = day_stats([at(0, "12:00", sec) for sec in range(41)])
    assert s.peak_ppm == 41


def test_date_is_calendar_day():
    s = day_stats([at(3, "23:59")])
    assert str(s.date) == "2025-01-15"


@settings(max_examples=200)
@given(st.lists(st.integers(0, 86399), min_size=1, max_size=60))
def test_day_stats_matches_definitions(offsets):
    times = sorted(DAY0 + o for o in offsets)
    s = day_stats(times)
    expected = naive_day_stats(times)
    for name, value in expected.items():
        assert getattr(s, name) == value
    assert s.first <= s.last
    assert s.largest_gap <= s.last - s.first
    assert s.effective_range_minutes >= 0


def test_subnet_grouping():
    records = sorted(recs("10.1.2.3", [at(0, "01:00")]) + recs("10.1.2.9", [at(0, "02:00"), at(1, "03:00")]),
                     key=lambda r: r.timestamp)
    tl = build_timelines(records, Level.C)
    key = EntityKey(Level.C, ip_to_int("10.1.2.0"))
    assert list(tl) == [key]
    t = tl[key]
    assert t.distinct_ips == 2
    assert [v[0] for v in t.visits] == [at(0, "01:00"), at(0, "02:00"), at(1, "03:00")]
    assert len(t.days) == 2
    assert t.key.cidr == "10.1.2.0/24"


def test_single_record_timeline():
    tl = build_timelines(recs("192.0.2.1", [at(0, "12:00")]), Level.IP)
    (t,) = tl.values()
    assert len(t.days) == 1
    assert t.days[0].hits == 1
    assert t.days[0].effective_range_minutes == 0
    assert t.distinct_ips == 1
    assert t.ave_hits_per_day == 1


def test_averages_use_active_days():
    times = [at(0, "10:00")] * 4 + [at(9, "10:00")] * 2
    (t,) = build_timelines(recs("192.0.2.1", times), Level.IP).values()
    assert t.active_days == 2
    assert t.ave_hits_per_day == 3
    assert t.span_days == 10
    assert t.span_ave_hits_per_day == 0.6


def test_entity_key_rejects_host_bits():
    with pytest.raises(ValueError):
        EntityKey(Level.C, ip_to_int("10.1.2.3"))


@given(st.integers(0, 2**32 - 1))
def test_mask_idempotence(ip):
    assert mask(mask(ip, Level.C), Level.C) == mask(ip, Level.C)
    assert mask(ip, Level.B) == mask(mask(ip, Level.C), Level.B)
    assert mask(ip, Level.A) == mask(mask(ip, Level.B), Level.A)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 5), st.integers(0, 7), st.integers(0, 5 * 86400)),
                min_size=1, max_size=80))
def test_aggregation_consistency(rows):
    records = sorted(
        (r for a, b, c, off in rows for r in recs(f"10.{a}.{b}.{c}", [DAY0 + off])), key=lambda r: r.timestamp
    )
    by_c = build_timelines(records, Level.C)
    by_b = build_timelines(records, Level.B)
    for key, t in by_b.items():
        members = [c for ck, c in by_c.items() if mask(ck.value, Level.B) == key.value]
        assert t.total_hits == sum(c.total_hits for c in members)
        assert t.distinct_ips == sum(c.distinct_ips for c in members)
    for level in Level:
        tl = build_timelines(records, level)
        assert sum(t.total_hits for t in tl.values()) == len(records)
        for t in tl.values():
            assert sum(d.hits for d in t.days) == t.total_hits
            dates = [d.date for d in t.days]
            assert dates == sorted(set(dates))


def test_midnight_rollover_splits_days():
    times = every(at(0, "22:00"), at(1, "02:00"), 600)
    (t,) = build_timelines(recs("192.0.2.1", times), Level.IP).values()
    assert len(t.days) == 2
    assert all(d.effective_range_minutes < 240 for d in t.days)


def test_max_consecutive_run():
    days = [0, 1, 2, 4, 5, 6, 7, 9]
    (t,) = build_timelines(recs("192.0.2.1", [at(d, "10:00") for d in days]), Level.IP).values()
    assert t.max_consecutive_run(lambda d: True) == 4
    assert t.max_consecutive_run(lambda d: d.date.day != 17) == 3  # Jan 17 splits the four-day run
    assert t.max_consecutive_run(lambda d: False) == 0
