"""Shared builders, strategies, and independent oracles for the test suite."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from datetime import datetime, timedelta, timezone

from hypothesis import strategies as st

from flowmine.clustering import reestimate, to_sequences
from flowmine.discovery import END, START
from flowmine.log import Event, EventLog, build_log

BASE = datetime(2020, 1, 1, tzinfo=timezone.utc)

ACTIVITIES = ["grind", "polish", "pack", "ship", "check"]
TRICKY_ACTIVITIES = ["cut, sew", 'label "x"', "a\nb", "plain", "naïve wash"]


def ev(case_id: str, activity: str, seconds: float, ms: int = 0) -> Event:
    return Event(
        case_id=case_id,
        activity=activity,
        timestamp=BASE + timedelta(seconds=seconds, milliseconds=ms),
    )


def log_of(*traces: tuple[str, list[tuple[str, float]]]) -> EventLog:
    """log_of(("c1", [("A", 0), ("B", 60)]), ...) -> EventLog."""
    events = [
        ev(case_id, activity, seconds)
        for case_id, steps in traces
        for activity, seconds in steps
    ]
    return build_log(events)


@st.composite
def random_logs(
    draw,
    min_events: int = 1,
    max_events: int = 40,
    activities: list[str] | None = None,
    max_cases: int = 6,
) -> EventLog:
    names = activities or ACTIVITIES
    n = draw(st.integers(min_events, max_events))
    events = []
    for _ in range(n):
        case = draw(st.integers(0, max_cases - 1))
        act = draw(st.sampled_from(names))
        secs = draw(st.integers(0, 10_000_000))
        ms = draw(st.integers(0, 999))
        events.append(ev(f"c{case}", act, secs, ms))
    return build_log(events)


def seeded_random_log(rng, max_events: int = 40, activities=None,
                      max_cases: int = 8) -> EventLog:
    """numpy-seeded counterpart of random_logs for fixed acceptance sweeps."""
    names = activities or ACTIVITIES
    n = int(rng.integers(1, max_events + 1))
    events = [
        ev(
            f"c{int(rng.integers(0, max_cases))}",
            names[int(rng.integers(0, len(names)))],
            float(rng.integers(0, 10_000_000)),
            ms=int(rng.integers(0, 1000)),
        )
        for _ in range(n)
    ]
    return build_log(events)


def random_markov_log(rng, cases: int, alphabet: int, max_len: int = 10,
                      header: bool = True) -> EventLog:
    """Random symbol soup, optionally with a header trace pinning the
    alphabet's first-appearance order."""
    events = []
    for i in range(cases):
        length = int(rng.integers(2, max_len + 1))
        symbols = rng.integers(0, alphabet, size=length)
        events += [ev(f"c{i}", f"a{s}", float(j * 10)) for j, s in enumerate(symbols)]
    if header:
        events += [ev("hdr", f"a{s}", float(s)) for s in range(alphabet)]
    return build_log(events)


def py_loglik(symbols, initial, transitions) -> float:
    """Pure-python product oracle for the Markov chain probability."""
    p = initial[symbols[0]]
    ll = math.log(p) if p > 0 else float("-inf")
    for a, b in zip(symbols, symbols[1:]):
        q = transitions[a][b]
        if q <= 0:
            return float("-inf")
        ll += math.log(q)
    return ll


def bruteforce_best_objective(log: EventLog, alpha: float) -> float:
    """Enumerate every 2-cluster hard assignment, re-estimate once, score."""
    seqs = to_sequences(log)
    alphabet = log.activity_order()
    n = len(seqs)
    best = -math.inf
    for bits in range(2 ** n):
        assignment = {seqs[i].case_id: (bits >> i) & 1 for i in range(n)}
        if len(set(assignment.values())) < 2:
            continue  # empty cluster: reseeding makes it non-deterministic
        model = reestimate(seqs, assignment, alphabet, k=2, alpha=alpha)
        objective = sum(
            max(
                py_loglik(s.symbols, c.initial.tolist(), c.transitions.tolist())
                for c in model.chains
            )
            for s in seqs
        )
        best = max(best, objective)
    return best


def assert_non_decreasing(trace, tol: float = 1e-9) -> None:
    for earlier, later in zip(trace, trace[1:]):
        assert later >= earlier - tol, f"objective decreased: {trace}"


def recount_dfg(log: EventLog):
    """Independent recount oracle: plain dict accumulation over traces."""
    freq = Counter()
    totals = defaultdict(int)
    nodes = Counter()
    for trace in log.traces:
        events = trace.events
        nodes.update(e.activity for e in events)
        freq[START, events[0].activity] += 1
        for a, b in zip(events, events[1:]):
            freq[a.activity, b.activity] += 1
            totals[a.activity, b.activity] += round(
                (b.timestamp - a.timestamp).total_seconds() * 1000)
        freq[events[-1].activity, END] += 1
    return freq, totals, nodes
