"""Canonical in-memory event-log model: events, traces, logs, and their
basic statistics.

Every other module consumes these types. All values are immutable after
construction and safe to share across workers. Durations are integer (or,
where averaging is involved, float) milliseconds; rendering them in human
units is a presentation concern handled elsewhere.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from statistics import fmean, median
from typing import Iterable, Iterator, Mapping

__all__ = [
    "EmptyLogError",
    "Event",
    "Trace",
    "EventLog",
    "LogStats",
    "FrequencyRow",
    "FrequencyTable",
    "build_log",
    "log_statistics",
    "activity_frequency",
    "filter_log",
]


class EmptyLogError(ValueError):
    """Raised when an operation needs at least one event and got none."""


def _as_utc(ts: datetime) -> datetime:
    # Naive timestamps are interpreted as UTC (documented bias); aware ones
    # are converted, so internally everything is a UTC instant.
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _duration_ms(start: datetime, end: datetime) -> int:
    delta = end - start
    return delta.days * 86_400_000 + delta.seconds * 1000 + delta.microseconds // 1000


@dataclass(frozen=True)
class Event:
    """One timestamped activity occurrence belonging to a case."""

    case_id: str
    activity: str
    timestamp: datetime
    attributes: Mapping[str, str] | None = None

    def __post_init__(self) -> None:
        if not self.case_id:
            raise ValueError("event case_id must be non-empty")
        if not self.activity:
            raise ValueError("event activity must be non-empty")
        object.__setattr__(self, "timestamp", _as_utc(self.timestamp))


@dataclass(frozen=True)
class Trace:
    """The time-ordered event sequence of one case.

    Events with equal timestamps keep their original input order (build_log
    sorts stably), so repeated runs over the same data are reproducible.
    """

    case_id: str
    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        if not self.events:
            raise ValueError(f"trace {self.case_id!r} has no events")
        for ev in self.events:
            if ev.case_id != self.case_id:
                raise ValueError(
                    f"trace {self.case_id!r} contains event of case {ev.case_id!r}"
                )
        for a, b in zip(self.events, self.events[1:]):
            if b.timestamp < a.timestamp:
                raise ValueError(f"trace {self.case_id!r} timestamps decrease")

    def __len__(self) -> int:
        return len(self.events)

    @property
    def activities(self) -> tuple[str, ...]:
        return tuple(ev.activity for ev in self.events)

    @property
    def start(self) -> datetime:
        return self.events[0].timestamp

    @property
    def end(self) -> datetime:
        return self.events[-1].timestamp

    @property
    def duration_ms(self) -> int:
        """Case duration: last minus first timestamp. 0 for single events."""
        return _duration_ms(self.start, self.end)


@dataclass(frozen=True)
class EventLog:
    """A set of traces plus the activity alphabet they use."""

    traces: tuple[Trace, ...]
    alphabet: frozenset[str]

    def __post_init__(self) -> None:
        ids = [t.case_id for t in self.traces]
        if len(set(ids)) != len(ids):
            dup = next(c for c in ids if ids.count(c) > 1)
            raise ValueError(f"duplicate case_id {dup!r} in log")
        seen = {ev.activity for t in self.traces for ev in t.events}
        if seen != set(self.alphabet):
            raise ValueError("alphabet does not match activities in traces")

    @classmethod
    def from_traces(cls, traces: Iterable[Trace]) -> "EventLog":
        traces = tuple(traces)
        alphabet = frozenset(ev.activity for t in traces for ev in t.events)
        return cls(traces=traces, alphabet=alphabet)

    @property
    def case_count(self) -> int:
        return len(self.traces)

    @property
    def event_count(self) -> int:
        return sum(len(t) for t in self.traces)

    @property
    def case_ids(self) -> tuple[str, ...]:
        return tuple(t.case_id for t in self.traces)

    def events(self) -> Iterator[Event]:
        for trace in self.traces:
            yield from trace.events

    def trace(self, case_id: str) -> Trace:
        for t in self.traces:
            if t.case_id == case_id:
                return t
        raise KeyError(case_id)

    def activity_order(self) -> tuple[str, ...]:
        """Activities in first-appearance order (trace order, then event order)."""
        seen: dict[str, None] = {}
        for ev in self.events():
            seen.setdefault(ev.activity, None)
        return tuple(seen)


@dataclass(frozen=True)
class LogStats:
    event_count: int
    case_count: int
    activity_count: int
    median_case_duration_ms: float
    mean_case_duration_ms: float
    start: datetime
    end: datetime


@dataclass(frozen=True)
class FrequencyRow:
    activity: str
    frequency: int
    relative: float  # percentage of all events, unrounded


@dataclass(frozen=True)
class FrequencyTable:
    """Per-activity absolute and relative frequencies, most frequent first."""

    rows: tuple[FrequencyRow, ...]
    event_count: int


def build_log(events: Iterable[Event]) -> EventLog:
    """Group events into per-case traces sorted by timestamp.

    Cases appear in the order their first event appears in the input; equal
    timestamps within a case keep input order (stable sort). An empty input
    yields an empty log.
    """
    by_case: dict[str, list[Event]] = {}
    for ev in events:
        by_case.setdefault(ev.case_id, []).append(ev)
    traces = [
        Trace(case_id=cid, events=tuple(sorted(evs, key=lambda e: e.timestamp)))
        for cid, evs in by_case.items()
    ]
    return EventLog.from_traces(traces)


def log_statistics(log: EventLog) -> LogStats:
    """Whole-log summary: counts, case-duration stats, time span.

    Case duration is last minus first event timestamp per trace; the median
    of an even number of cases is the mean of the two middle values.

    Raises EmptyLogError on an empty log (no start/end instants exist).
    """
    if not log.traces:
        raise EmptyLogError("cannot compute statistics of an empty log")
    durations = [t.duration_ms for t in log.traces]
    timestamps = [ev.timestamp for ev in log.events()]
    return LogStats(
        event_count=log.event_count,
        case_count=log.case_count,
        activity_count=len(log.alphabet),
        median_case_duration_ms=float(median(durations)),
        mean_case_duration_ms=fmean(durations),
        start=min(timestamps),
        end=max(timestamps),
    )


def activity_frequency(log: EventLog) -> FrequencyTable:
    """Count activity occurrences across all events.

    Rows are sorted by absolute frequency descending, ties by activity name
    ascending. Relative frequencies are unrounded percentages and sum to 100
    for a non-empty log.
    """
    counts = Counter(ev.activity for ev in log.events())
    total = sum(counts.values())
    rows = tuple(
        FrequencyRow(activity=a, frequency=n, relative=100.0 * n / total)
        for a, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    )
    return FrequencyTable(rows=rows, event_count=total)


def filter_log(
    log: EventLog,
    *,
    case_ids: set[str] | frozenset[str] | None = None,
    time_window: tuple[datetime, datetime] | None = None,
    activities: set[str] | frozenset[str] | None = None,
) -> EventLog:
    """Project a log by exactly one criterion.

    case_ids keeps whole traces; time_window keeps events with
    from <= t <= to; activities drops events outside the set. Traces that
    become empty are dropped, and the alphabet is recomputed, so the result
    satisfies all EventLog invariants. Filtering twice with the same
    criterion is a no-op.
    """
    given = [c for c in (case_ids, time_window, activities) if c is not None]
    if len(given) != 1:
        raise ValueError("exactly one filter criterion must be given")

    if case_ids is not None:
        kept = [t for t in log.traces if t.case_id in case_ids]
        return EventLog.from_traces(kept)

    if time_window is not None:
        lo, hi = (_as_utc(time_window[0]), _as_utc(time_window[1]))
        if lo > hi:
            raise ValueError(f"inverted time window: {lo} > {hi}")
        keep = lambda ev: lo <= ev.timestamp <= hi
    else:
        assert activities is not None
        keep = lambda ev: ev.activity in activities

    kept_traces = []
    for t in log.traces:
        events = tuple(ev for ev in t.events if keep(ev))
        if events:
            kept_traces.append(Trace(case_id=t.case_id, events=events))
    return EventLog.from_traces(kept_traces)
