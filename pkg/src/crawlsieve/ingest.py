"""Format-template compilation and access-log parsing.

A template is ordinary log text with capture groups in braces::

    {X.X.X.X} * * [{DD/MMM/YYYY}:{HH:MM:SS} *] "{GET} {PAGE} *" {RETURN} {BYTES}

``*`` matches any run of characters (not captured); everything else outside
braces is matched literally.
"""

from __future__ import annotations

import calendar
import logging
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

log = logging.getLogger(__name__)

IP = "{X.X.X.X}"
CLIENT = "{AAA}"
METHOD = "{GET}"
PAGE = "{PAGE}"
PLATFORM = "{PLATFORM}"
DATE_DMY = "{DD/MMM/YYYY}"
DATE_YMD = "{YYYY-MM-DD}"
TIME = "{HH:MM:SS}"
RETURN = "{RETURN}"
BYTES = "{BYTES}"
NUMBER = "{NNN}"
WILDCARD = "*"

SLOT_PATTERNS = {
    IP: r"(\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3})",
    CLIENT: r"(\S+)",
    METHOD: r"([A-Za-z]+)",
    PAGE: r"(\S+)",
    PLATFORM: r"(.*?)",
    DATE_DMY: r"(\d{1,2}/[A-Za-z]{3}/\d{4})",
    DATE_YMD: r"(\d{4}-\d{2}-\d{2})",
    TIME: r"(\d{2}:\d{2}:\d{2})",
    RETURN: r"(\d{3})",
    BYTES: r"(\d+|-)",
    NUMBER: r"(\d+)",
}
REPEATABLE = {NUMBER}
METHODS = ("GET", "POST", "HEAD")
UNKNOWN_METHOD = "unknown"
MONTHS = {name.lower(): i for i, name in enumerate(calendar.month_abbr) if name}
MONTH_NAMES = {i: name for i, name in enumerate(calendar.month_abbr) if name}

MAX_SKIP_LINES = 100

_TOKEN_RE = re.compile(r"\{[^{}]*\}|\*")


class FormatError(ValueError):
    """Base class for template compilation errors."""


class UnknownCaptureGroup(FormatError):
    def __init__(self, token: str):
        super().__init__(f"unknown capture group {token}")
        self.token = token


class MissingIpSlot(FormatError):
    def __init__(self):
        super().__init__(f"format has no {IP} slot")


class DuplicateSlot(FormatError):
    def __init__(self, kind: str):
        super().__init__(f"capture group {kind} appears more than once")
        self.kind = kind


class MissingTimeSlot(FormatError):
    def __init__(self):
        super().__init__(f"a date slot requires exactly one {TIME} slot")


class MissingDateSlot(FormatError):
    def __init__(self):
        super().__init__(f"a {TIME} slot requires a date slot")


@dataclass(frozen=True)
class FormatSpec:
    template: str
    slots: tuple  # (kind, position) in template order
    literals: tuple  # text between slots; len(literals) == len(slots) + 1
    regex: re.Pattern = field(repr=False, compare=False)

    def has(self, kind: str) -> bool:
        return any(k == kind for k, _ in self.slots)

    @property
    def has_timestamp(self) -> bool:
        return self.has(TIME)


@dataclass(frozen=True)
class AccessRecord:
    timestamp: Optional[int]
    ip: int
    ip_text: str
    page: Optional[str] = None
    method: Optional[str] = None
    status: Optional[int] = None
    bytes: Optional[int] = None
    client: Optional[str] = None
    platform: Optional[str] = None
    numbers: tuple = ()


@dataclass
class ParseReport:
    records: list
    skipped: int = 0
    skipped_lines: list = field(default_factory=list)

    @property
    def total_lines(self) -> int:
        return len(self.records) + self.skipped


def compile_format(template: str) -> FormatSpec:
    if not template:
        raise FormatError("empty format template")
    slots = []
    literals = []
    pieces = []
    pending = ""
    pos = 0
    for m in _TOKEN_RE.finditer(template):
        token = m.group(0)
        literal = template[pos:m.start()]
        pos = m.end()
        if token == WILDCARD:
            pieces.append(re.escape(literal) + ".*?")
            pending += literal + WILDCARD
            continue
        if token not in SLOT_PATTERNS:
            raise UnknownCaptureGroup(token)
        if token not in REPEATABLE and any(k == token for k, _ in slots):
            raise DuplicateSlot(token)
        pieces.append(re.escape(literal) + SLOT_PATTERNS[token])
        literals.append(pending + literal)
        pending = ""
        slots.append((token, m.start()))
    tail = template[pos:]
    pieces.append(re.escape(tail))
    literals.append(pending + tail)

    kinds = [k for k, _ in slots]
    if IP not in kinds:
        raise MissingIpSlot()
    has_date = DATE_DMY in kinds or DATE_YMD in kinds
    if has_date and TIME not in kinds:
        raise MissingTimeSlot()
    if TIME in kinds and not has_date:
        raise MissingDateSlot()
    regex = re.compile("".join(pieces), re.DOTALL)
    return FormatSpec(template, tuple(slots), tuple(literals), regex)


def ip_to_int(text: str) -> Optional[int]:
    parts = text.split(".")
    if len(parts) != 4:
        return None
    value = 0
    for p in parts:
        if not p.isdigit() or len(p) > 3:
            return None
        octet = int(p)
        if octet > 255:
            return None
        value = (value << 8) | octet
    return value


def int_to_ip(value: int) -> str:
    return ".".join(str((value >> s) & 0xFF) for s in (24, 16, 8, 0))


def _day_number(year: int, month: int, day: int) -> Optional[int]:
    if not 1 <= month <= 12 or year < 1970:
        return None
    if not 1 <= day <= calendar.monthrange(year, month)[1]:
        return None
    return calendar.timegm((year, month, day, 0, 0, 0)) // 86400


def _parse_dmy(text: str) -> Optional[int]:
    d, mon, y = text.split("/")
    month = MONTHS.get(mon.lower())
    if month is None:
        return None
    return _day_number(int(y), month, int(d))


def _parse_ymd(text: str) -> Optional[int]:
    y, m, d = text.split("-")
    return _day_number(int(y), int(m), int(d))


def _parse_time(text: str) -> Optional[int]:
    h, m, s = (int(x) for x in text.split(":"))
    if h > 23 or m > 59 or s > 59:
        return None
    return h * 3600 + m * 60 + s


def parse_line(spec: FormatSpec, line: str) -> Optional[AccessRecord]:
    """Parse one log line; None when the line does not fit the template."""
    m = spec.regex.fullmatch(line.rstrip("\r\n"))
    if m is None:
        return None
    fields = {}
    day = None
    seconds = None
    numbers = []
    for (kind, _), value in zip(spec.slots, m.groups()):
        if kind == IP:
            ip = ip_to_int(value)
            if ip is None:
                return None
            fields["ip"] = ip
            fields["ip_text"] = int_to_ip(ip)
        elif kind == DATE_DMY or kind == DATE_YMD:
            parsed = _parse_dmy(value) if kind == DATE_DMY else _parse_ymd(value)
            if parsed is None or (day is not None and parsed != day):
                return None
            day = parsed
        elif kind == TIME:
            seconds = _parse_time(value)
            if seconds is None:
                return None
        elif kind == METHOD:
            upper = value.upper()
            fields["method"] = upper if upper in METHODS else UNKNOWN_METHOD
        elif kind == PAGE:
            fields["page"] = value
        elif kind == CLIENT:
            fields["client"] = value
        elif kind == PLATFORM:
            fields["platform"] = value
        elif kind == RETURN:
            fields["status"] = int(value)
        elif kind == BYTES:
            fields["bytes"] = None if value == "-" else int(value)
        elif kind == NUMBER:
            numbers.append(int(value))
    timestamp = None
    if day is not None:
        timestamp = day * 86400 + seconds
        if timestamp <= 0:
            return None
    return AccessRecord(timestamp=timestamp, numbers=tuple(numbers), **fields)


def parse_log(spec: FormatSpec, lines: Iterable[str]) -> ParseReport:
    records = []
    skipped = 0
    skipped_lines = []
    for lineno, line in enumerate(lines, 1):
        rec = parse_line(spec, line)
        if rec is None:
            skipped += 1
            if len(skipped_lines) < MAX_SKIP_LINES:
                skipped_lines.append(lineno)
            continue
        records.append(rec)
    if spec.has_timestamp:
        records.sort(key=lambda r: r.timestamp)  # list.sort is stable
    if skipped:
        log.info("skipped %d of %d lines", skipped, len(records) + skipped)
    return ParseReport(records, skipped, skipped_lines)


def read_lines(paths: Iterable[str]) -> Iterator[str]:
    for path in paths:
        with open(path, encoding="utf-8", errors="replace", newline="") as fh:
            for line in fh:
                yield line


def parse_files(spec: FormatSpec, paths: Iterable[str]) -> ParseReport:
    return parse_log(spec, read_lines(paths))


def format_date(kind: str, timestamp: int) -> str:
    st = time.gmtime(timestamp)
    if kind == DATE_DMY:
        return f"{st.tm_mday:02d}/{MONTH_NAMES[st.tm_mon]}/{st.tm_year:04d}"
    return f"{st.tm_year:04d}-{st.tm_mon:02d}-{st.tm_mday:02d}"


def render_record(spec: FormatSpec, record: AccessRecord, placeholder: str = "-") -> str:
    """Write a record back out through the template.

    Wildcards are filled with ``placeholder``. Inverse of :func:`parse_line`
    as long as free-text fields do not contain the literal text that follows
    them in the template.
    """
    out = []
    numbers = iter(record.numbers)
    for literal, (kind, _) in zip(spec.literals, spec.slots):
        out.append(literal.replace(WILDCARD, placeholder))
        out.append(_render_slot(kind, record, numbers))
    out.append(spec.literals[-1].replace(WILDCARD, placeholder))
    return "".join(out)


def _render_slot(kind, record, numbers) -> str:
    if kind == IP:
        return record.ip_text
    if kind in (DATE_DMY, DATE_YMD):
        return format_date(kind, record.timestamp)
    if kind == TIME:
        s = record.timestamp % 86400
        return f"{s // 3600:02d}:{s % 3600 // 60:02d}:{s % 60:02d}"
    if kind == METHOD:
        return record.method
    if kind == PAGE:
        return record.page
    if kind == CLIENT:
        return record.client
    if kind == PLATFORM:
        return record.platform
    if kind == RETURN:
        return f"{record.status:03d}"
    if kind == BYTES:
        return "-" if record.bytes is None else str(record.bytes)
    return str(next(numbers))
