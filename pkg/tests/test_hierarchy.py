from crawlsieve.hierarchy import run_hierarchy
from crawlsieve.ingest import ip_to_int
from crawlsieve.policy import PolicyParams, Trigger
from crawlsieve.synthgen import generate
from crawlsieve.timeline import EntityKey, Level, mask

from conftest import at, every, rec

P = PolicyParams()


def quiet_subnet_records(days=7, machines=40):
    """Each machine owns a 30-minute slot from 02:00 and makes 10 hits in it.

    Individually every machine is far below all limits; together the /24
    covers 20 hours a day with 400 hits.
    """
    records = []
    for d in range(days):
        for i in range(machines):
            start = at(d, "02:00") + i * 1800
            records += [rec(f"10.1.2.{i + 1}", t) for t in every(start, start + 9 * 180, 180)]
    return sorted(records, key=lambda r: r.timestamp)


def test_quiet_machines_caught_as_a_subnet():
    results = run_hierarchy(quiet_subnet_records(), P)
    assert len(results[Level.IP].verdicts) == 40
    assert not results[Level.IP].blocked()
    key = EntityKey(Level.C, ip_to_int("10.1.2.0"))
    v = results[Level.C].verdicts[key]
    assert v.blocked
    assert {Trigger.DAILY_TOTAL, Trigger.DAILY_RANGE, Trigger.CONSECUTIVE} <= v.triggers
    t = results[Level.C].timelines[key]
    assert t.days[0].hits == 400


def test_lone_ip_cannot_be_blocked_as_subnet():
    records = [rec("10.9.9.9", t) for d in range(10) for t in every(at(d, "00:00"), at(d, "23:00"), 300)]
    results = run_hierarchy(records, P)
    assert results[Level.IP].blocked()
    c_key = EntityKey(Level.C, ip_to_int("10.9.9.0"))
    assert results[Level.C].timelines[c_key].distinct_ips == 1
    assert not results[Level.C].verdicts[c_key].blocked


def test_conservation_and_containment():
    corpus = generate(["A", "G", "J"], human_sessions=5, seed=3, days=4)
    records = corpus.records
    results = run_hierarchy(records, P)
    for level in Level:
        assert sum(t.total_hits for t in results[level].timelines.values()) == len(records)
    keys = {level: set(results[level].timelines) for level in Level}
    for finer, coarser in ((Level.IP, Level.C), (Level.C, Level.B), (Level.B, Level.A)):
        for k in keys[finer]:
            assert EntityKey(coarser, mask(k.value, coarser)) in keys[coarser]
    assert results[Level.A].verdicts == {}
    assert set(results[Level.C].verdicts) <= set(results[Level.C].timelines)


def test_deterministic():
    records = quiet_subnet_records(days=3)
    a = run_hierarchy(records, P)
    b = run_hierarchy(records, P)
    for level in Level:
        assert a[level].verdicts == b[level].verdicts
