"""Variant extraction, directly-follows graphs, bottleneck ranking, and DOT
map export.

A directly-follows edge a -> b aggregates every occurrence of b immediately
following a within a trace, with the timestamp gap between the two events
(idle time) accumulated per edge. Synthetic START/END nodes make per-trace
entry and exit explicit; their edges carry zero durations because no
interval is defined for them.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median

import numpy as np

from .log import EventLog
from .units import humanize_duration

__all__ = [
    "START",
    "END",
    "Variant",
    "DfgEdge",
    "DirectlyFollowsGraph",
    "BottleneckEntry",
    "BottleneckReport",
    "extract_variants",
    "build_dfg",
    "rank_bottlenecks",
    "export_dot",
]

START = "__START__"
END = "__END__"

FLAG_PERCENTILE = 95.0


@dataclass(frozen=True)
class Variant:
    """An equivalence class of cases sharing the exact same activity sequence."""

    sequence: tuple[str, ...]
    case_ids: tuple[str, ...]
    min_case_duration_ms: int
    median_case_duration_ms: float
    max_case_duration_ms: int

    @property
    def case_count(self) -> int:
        return len(self.case_ids)


@dataclass(frozen=True)
class DfgEdge:
    source: str
    target: str
    frequency: int
    total_duration_ms: int
    min_duration_ms: int
    max_duration_ms: int

    @property
    def mean_duration_ms(self) -> float:
        return self.total_duration_ms / self.frequency

    @property
    def synthetic(self) -> bool:
        return self.source == START or self.target == END


@dataclass(frozen=True)
class DirectlyFollowsGraph:
    """Activities as nodes (with absolute frequencies), directly-follows
    pairs as duration-annotated edges, plus synthetic START/END."""

    node_frequencies: dict[str, int]
    edges: tuple[DfgEdge, ...]
    trace_count: int

    def edge(self, source: str, target: str) -> DfgEdge:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e
        raise KeyError((source, target))


@dataclass(frozen=True)
class BottleneckEntry:
    edge: DfgEdge
    score_ms: float
    flagged: bool


@dataclass(frozen=True)
class BottleneckReport:
    mode: str  # total | mean | max
    entries: tuple[BottleneckEntry, ...]
    threshold_ms: float
    threshold_description: str


def extract_variants(log: EventLog) -> list[Variant]:
    """Group cases by exact activity-sequence equality.

    Variants come out sorted by case count descending; ties keep the order
    in which each variant's first case appears in the log.
    """
    groups: dict[tuple[str, ...], list] = {}
    for trace in log.traces:
        groups.setdefault(trace.activities, []).append(trace)
    variants = []
    for seq, traces in groups.items():
        durations = [t.duration_ms for t in traces]
        variants.append(
            Variant(
                sequence=seq,
                case_ids=tuple(t.case_id for t in traces),
                min_case_duration_ms=min(durations),
                median_case_duration_ms=float(median(durations)),
                max_case_duration_ms=max(durations),
            )
        )
    # Stable sort: dict order is first-appearance order already.
    variants.sort(key=lambda v: -v.case_count)
    return variants


def build_dfg(log: EventLog) -> DirectlyFollowsGraph:
    """Accumulate directly-follows frequencies and idle times per edge.

    Self-loops (the same activity twice in a row) are ordinary edges. Every
    trace contributes START -> first and last -> END edges.
    """
    freq: dict[tuple[str, str], int] = {}
    total: dict[tuple[str, str], int] = {}
    lo: dict[tuple[str, str], int] = {}
    hi: dict[tuple[str, str], int] = {}
    nodes: dict[str, int] = {}

    def bump(key: tuple[str, str], gap_ms: int | None) -> None:
        freq[key] = freq.get(key, 0) + 1
        if gap_ms is None:
            total.setdefault(key, 0)
            lo.setdefault(key, 0)
            hi.setdefault(key, 0)
        else:
            total[key] = total.get(key, 0) + gap_ms
            lo[key] = min(lo.get(key, gap_ms), gap_ms)
            hi[key] = max(hi.get(key, gap_ms), gap_ms)

    for trace in log.traces:
        events = trace.events
        for ev in events:
            nodes[ev.activity] = nodes.get(ev.activity, 0) + 1
        bump((START, events[0].activity), None)
        for a, b in zip(events, events[1:]):
            gap = b.timestamp - a.timestamp
            gap_ms = gap.days * 86_400_000 + gap.seconds * 1000 + gap.microseconds // 1000
            bump((a.activity, b.activity), gap_ms)
        bump((events[-1].activity, END), None)

    edges = tuple(
        DfgEdge(
            source=s,
            target=t,
            frequency=freq[s, t],
            total_duration_ms=total[s, t],
            min_duration_ms=lo[s, t],
            max_duration_ms=hi[s, t],
        )
        for s, t in sorted(freq)
    )
    return DirectlyFollowsGraph(
        node_frequencies=dict(sorted(nodes.items())),
        edges=edges,
        trace_count=log.case_count,
    )


def _edge_score(edge: DfgEdge, mode: str) -> float:
    if mode == "total":
        return float(edge.total_duration_ms)
    if mode == "mean":
        return edge.mean_duration_ms
    if mode == "max":
        return float(edge.max_duration_ms)
    raise ValueError(f"unknown bottleneck mode {mode!r}")


def rank_bottlenecks(
    dfg: DirectlyFollowsGraph, mode: str = "total", top_n: int = 10
) -> BottleneckReport:
    """Rank non-synthetic edges by the chosen idle-time statistic.

    Ordering: score descending, ties by frequency descending, then by
    (source, target) lexicographically. Edges scoring at or above the 95th
    percentile of all edge scores are flagged as bottleneck candidates; the
    cutoff is descriptive, the full ranking is the real output.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    real_edges = [e for e in dfg.edges if not e.synthetic]
    if not real_edges:
        return BottleneckReport(
            mode=mode, entries=(), threshold_ms=0.0,
            threshold_description="no edges",
        )
    scores = [_edge_score(e, mode) for e in real_edges]
    threshold = float(np.percentile(scores, FLAG_PERCENTILE))
    ranked = sorted(
        real_edges,
        key=lambda e: (-_edge_score(e, mode), -e.frequency, e.source, e.target),
    )
    entries = tuple(
        BottleneckEntry(
            edge=e,
            score_ms=_edge_score(e, mode),
            flagged=_edge_score(e, mode) >= threshold,
        )
        for e in ranked[:top_n]
    )
    description = (
        f"flagged when {mode} idle time >= {FLAG_PERCENTILE:.0f}th percentile "
        f"of edge scores ({threshold:.0f} ms)"
    )
    return BottleneckReport(
        mode=mode,
        entries=entries,
        threshold_ms=threshold,
        threshold_description=description,
    )


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(
    dfg: DirectlyFollowsGraph, mode: str = "frequency", unit: str = "auto"
) -> str:
    """Render the graph as a deterministic DOT digraph.

    Node labels carry the activity plus its absolute frequency; edge labels
    carry the frequency (frequency mode) or the humanized duration statistic
    (total/mean/max modes). Edge pen width grows logarithmically with
    frequency so dominant paths stay readable. Output is byte-identical for
    equal graphs.
    """
    if mode not in ("frequency", "total", "mean", "max"):
        raise ValueError(f"unknown map mode {mode!r}")
    lines = ["digraph dfg {", "  rankdir=LR;", "  node [shape=box, style=rounded];"]
    lines.append(f'  {_dot_quote(START)} [label="START", shape=circle, style=solid];')
    lines.append(f'  {_dot_quote(END)} [label="END", shape=doublecircle, style=solid];')
    for activity, count in dfg.node_frequencies.items():
        label = _dot_escape(activity) + f"\\n{count}"
        lines.append(f'  {_dot_quote(activity)} [label="{label}"];')
    max_freq = max((e.frequency for e in dfg.edges), default=1)
    for e in dfg.edges:
        if mode == "frequency" or e.synthetic:
            label = str(e.frequency)
        else:
            label = humanize_duration(_edge_score(e, mode), unit)
        penwidth = 1.0 + 3.0 * float(np.log2(1.0 + e.frequency / max_freq))
        lines.append(
            f"  {_dot_quote(e.source)} -> {_dot_quote(e.target)} "
            f'[label="{label}", penwidth={penwidth:.2f}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
