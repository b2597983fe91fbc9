"""Event-log ingestion (CSV and a minimal MXML subset) and CSV export.

Parsers are pure functions of their input text: same bytes and mapping give
the same log and report. Timestamps without zone information are read as
UTC so runs do not depend on the host locale.
"""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, TextIO
from xml.etree import ElementTree

from .log import Event, EventLog, build_log

__all__ = [
    "CsvMapping",
    "MappingError",
    "LogParseError",
    "ParseReport",
    "parse_csv",
    "parse_mxml",
    "write_csv",
    "parse_timestamp",
    "format_timestamp",
]

MAX_REPORTED_ERRORS = 20

DEFAULT_LIFECYCLE_FILTER = frozenset({"complete"})


class MappingError(ValueError):
    """Configuration problem: the mapping does not fit the input header."""


class LogParseError(ValueError):
    """Unrecoverable input problem (strict mode row error, malformed XML)."""

    def __init__(self, locator: str, message: str):
        super().__init__(f"{locator}: {message}")
        self.locator = locator


@dataclass(frozen=True)
class CsvMapping:
    """Which CSV columns hold the case id, activity, and timestamp."""

    case_column: str = "case_id"
    activity_column: str = "activity"
    timestamp_column: str = "timestamp"
    timestamp_format: str = "rfc3339"  # or a strptime pattern
    delimiter: str = ","

    def __post_init__(self) -> None:
        names = (self.case_column, self.activity_column, self.timestamp_column)
        if not all(names):
            raise MappingError("mapped column names must be non-empty")
        if len(set(names)) != 3:
            raise MappingError(f"mapped column names must be distinct, got {names}")
        if len(self.delimiter) != 1:
            raise MappingError("delimiter must be a single character")


@dataclass
class ParseReport:
    """What happened during a parse: row counts plus the first few errors."""

    events_parsed: int = 0
    rows_rejected: int = 0
    first_errors: list[tuple[str, str]] = field(default_factory=list)

    def reject(self, locator: str, message: str) -> None:
        self.rows_rejected += 1
        if len(self.first_errors) < MAX_REPORTED_ERRORS:
            self.first_errors.append((locator, message))


def parse_timestamp(raw: str, fmt: str = "rfc3339") -> datetime:
    """Parse a timestamp string to a UTC instant.

    fmt "rfc3339" accepts ISO-8601/RFC-3339 forms ("2019-01-01T01:00:00Z",
    offsets, optional fractional seconds, space separator); anything else is
    treated as a strptime pattern. Zone-less values are taken as UTC.
    """
    raw = raw.strip()
    if fmt == "rfc3339":
        text = raw[:-1] + "+00:00" if raw.endswith(("Z", "z")) else raw
        dt = datetime.fromisoformat(text)
    else:
        dt = datetime.strptime(raw, fmt)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    """RFC 3339 UTC rendering, trimming the fractional part when possible."""
    dt = dt.astimezone(timezone.utc) if dt.tzinfo else dt.replace(tzinfo=timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    us = dt.microsecond
    if us == 0:
        frac = ""
    elif us % 1000 == 0:
        frac = f".{us // 1000:03d}"
    else:
        frac = f".{us:06d}"
    return base + frac + "Z"


def _as_text_stream(text: str | TextIO) -> TextIO:
    return _io.StringIO(text) if isinstance(text, str) else text


def parse_csv(
    text: str | TextIO,
    mapping: CsvMapping | None = None,
    strict: bool = False,
) -> tuple[EventLog, ParseReport]:
    """Parse a delimited event log with a header row.

    One event per data row. With strict=True the first bad row raises
    LogParseError; otherwise bad rows are counted in the report and skipped.
    A mapping that names a column absent from the header raises MappingError
    either way. Columns outside the mapping are ignored.
    """
    mapping = mapping or CsvMapping()
    reader = csv.reader(_as_text_stream(text), delimiter=mapping.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise MappingError("input has no header row") from None

    indices = {}
    for name in (mapping.case_column, mapping.activity_column, mapping.timestamp_column):
        try:
            indices[name] = header.index(name)
        except ValueError:
            raise MappingError(f"column {name!r} not found in header {header}") from None
    ci = indices[mapping.case_column]
    ai = indices[mapping.activity_column]
    ti = indices[mapping.timestamp_column]

    report = ParseReport()
    events: list[Event] = []
    for lineno, row in enumerate(reader, start=2):
        locator = f"line {lineno}"
        try:
            if len(row) <= max(ci, ai, ti):
                raise ValueError(f"expected at least {max(ci, ai, ti) + 1} fields, got {len(row)}")
            case_id, activity = row[ci], row[ai]
            if not case_id:
                raise ValueError("empty case id field")
            if not activity:
                raise ValueError("empty activity field")
            ts = parse_timestamp(row[ti], mapping.timestamp_format)
        except ValueError as exc:
            if strict:
                raise LogParseError(locator, str(exc)) from None
            report.reject(locator, str(exc))
            continue
        events.append(Event(case_id=case_id, activity=activity, timestamp=ts))
        report.events_parsed += 1

    return build_log(events), report


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _find_child(elem: ElementTree.Element, name: str) -> ElementTree.Element | None:
    for child in elem:
        if _strip_ns(child.tag) == name:
            return child
    return None


def parse_mxml(
    text: str | TextIO,
    event_type_filter: Iterable[str] | None = None,
) -> tuple[EventLog, ParseReport]:
    """Parse the MXML subset exported by ProM-style tools.

    Supported structure: WorkflowLog -> Process -> ProcessInstance (id
    attribute = case id) -> AuditTrailEntry with WorkflowModelElement
    (activity), EventType (lifecycle), and Timestamp (ISO-8601) children.
    Entries whose EventType is outside the filter (default {"complete"},
    compared case-insensitively) are skipped silently; attributes, Data
    sections, and Source elements are ignored. Malformed XML raises
    LogParseError.
    """
    allowed = frozenset(
        s.lower() for s in (event_type_filter if event_type_filter is not None
                            else DEFAULT_LIFECYCLE_FILTER)
    )
    data = text if isinstance(text, str) else text.read()
    try:
        root = ElementTree.fromstring(data)
    except ElementTree.ParseError as exc:
        raise LogParseError("document", f"malformed XML: {exc}") from None

    report = ParseReport()
    events: list[Event] = []
    instances = [
        el
        for el in root.iter()
        if _strip_ns(el.tag) == "ProcessInstance"
    ]
    for inst_idx, instance in enumerate(instances):
        case_id = instance.get("id")
        inst_locator = f"ProcessInstance[{inst_idx}]"
        for entry_idx, entry in enumerate(instance):
            if _strip_ns(entry.tag) != "AuditTrailEntry":
                continue
            locator = f"{inst_locator}/AuditTrailEntry[{entry_idx}]"
            etype = _find_child(entry, "EventType")
            lifecycle = (etype.text or "").strip().lower() if etype is not None else "complete"
            if lifecycle not in allowed:
                continue  # filtered, not an error
            if not case_id:
                report.reject(locator, "ProcessInstance has no id attribute")
                continue
            wme = _find_child(entry, "WorkflowModelElement")
            ts_el = _find_child(entry, "Timestamp")
            if wme is None or not (wme.text or "").strip():
                report.reject(locator, "missing WorkflowModelElement")
                continue
            if ts_el is None or not (ts_el.text or "").strip():
                report.reject(locator, "missing Timestamp")
                continue
            try:
                ts = parse_timestamp(ts_el.text.strip())
            except ValueError as exc:
                report.reject(locator, f"bad timestamp: {exc}")
                continue
            events.append(
                Event(case_id=case_id, activity=wme.text.strip(), timestamp=ts)
            )
            report.events_parsed += 1

    return build_log(events), report


def write_csv(log: EventLog) -> str:
    """Serialize a log as `case_id,activity,timestamp` rows.

    Traces come out in log order, events in trace order, timestamps in
    RFC 3339 UTC. Fields containing the delimiter, quotes, or newlines are
    quoted RFC-4180 style, so parse_csv(write_csv(log)) reproduces the log
    exactly (at millisecond timestamp resolution and below).
    """
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["case_id", "activity", "timestamp"])
    for trace in log.traces:
        for ev in trace.events:
            writer.writerow([ev.case_id, ev.activity, format_timestamp(ev.timestamp)])
    return buf.getvalue()
