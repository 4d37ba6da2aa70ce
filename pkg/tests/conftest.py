import calendar

import pytest

from crawlsieve.ingest import AccessRecord, int_to_ip, ip_to_int

DAY0 = calendar.timegm((2025, 1, 12, 0, 0, 0))

ACCEPTANCE_RESULTS = []


def at(day: int, hhmm: str, seconds: int = 0) -> int:
    """Timestamp for ``day`` days after 2025-01-12 at ``hh:mm``."""
    h, m = map(int, hhmm.split(":"))
    return DAY0 + day * 86400 + h * 3600 + m * 60 + seconds


def rec(ip, t, page="/index.html"):
    value = ip_to_int(ip) if isinstance(ip, str) else ip
    return AccessRecord(timestamp=t, ip=value, ip_text=int_to_ip(value), page=page, method="GET")


def recs(ip, times, page="/index.html"):
    return [rec(ip, t, page) for t in sorted(times)]


def every(start: int, stop: int, step: int) -> list:
    return list(range(start, stop + 1, step))


@pytest.fixture
def record_result():
    def _record(number, name, ok, detail=""):
        ACCEPTANCE_RESULTS.append((number, name, ok, detail))
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:>2}. {name}" + (f"  ({detail})" if detail else ""))
