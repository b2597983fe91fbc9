"""Report formatting: text tables, JSON payloads, and delimited rows.

Text tables round durations to one decimal and percentages to two; JSON and
CSV payloads carry the raw millisecond values (full precision) alongside any
humanized string, and use stable key and row order so identical inputs give
byte-identical output.
"""

from __future__ import annotations

import csv
import io as _io
import json

from .clustering import ClusteringResult, ClusterSummary
from .discovery import BottleneckReport, Variant
from .io import format_timestamp
from .log import FrequencyTable, LogStats
from .units import humanize_duration

__all__ = [
    "to_json",
    "stats_text",
    "stats_dict",
    "stats_csv",
    "frequency_text",
    "frequency_dict",
    "frequency_csv",
    "variants_text",
    "variants_dict",
    "variants_csv",
    "bottlenecks_text",
    "bottlenecks_dict",
    "bottlenecks_csv",
    "cluster_text",
    "cluster_dict",
    "cluster_csv",
]


def to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def _table(rows: list[list[str]], indent: str = "") -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = [
        indent + "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    ]
    return "\n".join(lines) + "\n"


def _csv_rows(rows: list[list]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


# -- stats ------------------------------------------------------------------

def stats_text(stats: LogStats, unit: str = "auto") -> str:
    rows = [
        ["Events", str(stats.event_count)],
        ["Cases", str(stats.case_count)],
        ["Activities", str(stats.activity_count)],
        ["Median case duration", humanize_duration(stats.median_case_duration_ms, unit)],
        ["Mean case duration", humanize_duration(stats.mean_case_duration_ms, unit)],
        ["Start", format_timestamp(stats.start)],
        ["End", format_timestamp(stats.end)],
    ]
    return _table(rows)


def stats_dict(stats: LogStats, unit: str = "auto") -> dict:
    return {
        "events": stats.event_count,
        "cases": stats.case_count,
        "activities": stats.activity_count,
        "median_case_duration_ms": stats.median_case_duration_ms,
        "median_case_duration": humanize_duration(stats.median_case_duration_ms, unit),
        "mean_case_duration_ms": stats.mean_case_duration_ms,
        "mean_case_duration": humanize_duration(stats.mean_case_duration_ms, unit),
        "start": format_timestamp(stats.start),
        "end": format_timestamp(stats.end),
    }


def stats_csv(stats: LogStats) -> str:
    return _csv_rows(
        [
            ["metric", "value"],
            ["events", stats.event_count],
            ["cases", stats.case_count],
            ["activities", stats.activity_count],
            ["median_case_duration_ms", stats.median_case_duration_ms],
            ["mean_case_duration_ms", stats.mean_case_duration_ms],
            ["start", format_timestamp(stats.start)],
            ["end", format_timestamp(stats.end)],
        ]
    )


# -- frequency --------------------------------------------------------------

def frequency_text(table: FrequencyTable) -> str:
    rows = [["Activity", "Frequency", "Relative frequency (%)"]]
    for row in table.rows:
        rows.append([row.activity, str(row.frequency), f"{row.relative:.2f}"])
    return _table(rows)


def frequency_dict(table: FrequencyTable) -> dict:
    return {
        "events": table.event_count,
        "rows": [
            {"activity": r.activity, "frequency": r.frequency, "relative": r.relative}
            for r in table.rows
        ],
    }


def frequency_csv(table: FrequencyTable) -> str:
    rows = [["activity", "frequency", "relative"]]
    rows += [[r.activity, r.frequency, repr(r.relative)] for r in table.rows]
    return _csv_rows(rows)


# -- variants ---------------------------------------------------------------

def variants_text(variants: list[Variant], unit: str = "auto") -> str:
    rows = [["Variant", "Cases", "Events per case", "Max duration", "Sequence"]]
    for i, v in enumerate(variants, start=1):
        rows.append(
            [
                str(i),
                str(v.case_count),
                str(len(v.sequence)),
                humanize_duration(v.max_case_duration_ms, unit),
                " -> ".join(v.sequence),
            ]
        )
    return _table(rows)


def variants_dict(variants: list[Variant], unit: str = "auto") -> dict:
    return {
        "variants": [
            {
                "variant": i,
                "cases": v.case_count,
                "case_ids": list(v.case_ids),
                "events_per_case": len(v.sequence),
                "sequence": list(v.sequence),
                "min_duration_ms": v.min_case_duration_ms,
                "median_duration_ms": v.median_case_duration_ms,
                "max_duration_ms": v.max_case_duration_ms,
                "max_duration": humanize_duration(v.max_case_duration_ms, unit),
            }
            for i, v in enumerate(variants, start=1)
        ]
    }


def variants_csv(variants: list[Variant]) -> str:
    rows = [
        [
            "variant",
            "cases",
            "events_per_case",
            "min_duration_ms",
            "median_duration_ms",
            "max_duration_ms",
            "case_ids",
            "sequence",
        ]
    ]
    for i, v in enumerate(variants, start=1):
        rows.append(
            [
                i,
                v.case_count,
                len(v.sequence),
                v.min_case_duration_ms,
                v.median_case_duration_ms,
                v.max_case_duration_ms,
                ";".join(v.case_ids),
                " -> ".join(v.sequence),
            ]
        )
    return _csv_rows(rows)


# -- bottlenecks --------------------------------------------------------------

def bottlenecks_text(report: BottleneckReport, unit: str = "auto") -> str:
    if not report.entries:
        return f"No edges to rank (mode {report.mode}).\n"
    rows = [["#", "From", "To", "Frequency", f"Idle ({report.mode})", "Flag"]]
    for i, entry in enumerate(report.entries, start=1):
        rows.append(
            [
                str(i),
                entry.edge.source,
                entry.edge.target,
                str(entry.edge.frequency),
                humanize_duration(entry.score_ms, unit),
                "*" if entry.flagged else "",
            ]
        )
    return _table(rows) + report.threshold_description + "\n"


def bottlenecks_dict(report: BottleneckReport, unit: str = "auto") -> dict:
    return {
        "mode": report.mode,
        "threshold_ms": report.threshold_ms,
        "threshold": report.threshold_description,
        "edges": [
            {
                "rank": i,
                "from": e.edge.source,
                "to": e.edge.target,
                "frequency": e.edge.frequency,
                "score_ms": e.score_ms,
                "score": humanize_duration(e.score_ms, unit),
                "flagged": e.flagged,
            }
            for i, e in enumerate(report.entries, start=1)
        ],
    }


def bottlenecks_csv(report: BottleneckReport) -> str:
    rows = [["rank", "from", "to", "frequency", "score_ms", "flagged"]]
    for i, e in enumerate(report.entries, start=1):
        rows.append(
            [i, e.edge.source, e.edge.target, e.edge.frequency, repr(e.score_ms), e.flagged]
        )
    return _csv_rows(rows)


# -- clustering ---------------------------------------------------------------

def cluster_text(
    result: ClusteringResult, summary: ClusterSummary, unit: str = "auto"
) -> str:
    state = "converged" if result.converged else "stopped"
    head = (
        f"K={result.model.k} seed={result.seed} "
        f"alpha={result.model.smoothing_alpha} restarts={result.restarts}\n"
        f"{state} after {result.iterations} iterations, "
        f"objective {result.objective_trace[-1]:.4f}\n"
    )
    parts = [head]
    for breakdown in summary.clusters:
        parts.append(
            f"\nCluster {breakdown.cluster}: "
            f"{breakdown.case_count} cases, {breakdown.event_count} events\n"
        )
        if not breakdown.groups:
            continue
        rows = [["Instances", "Cases", "Events", "Duration"]]
        for g in breakdown.groups:
            rows.append(
                [
                    str(g.case_count),
                    ", ".join(g.case_ids),
                    str(g.events_per_case),
                    humanize_duration(g.max_case_duration_ms, unit),
                ]
            )
        parts.append(_table(rows, indent="  "))
    return "".join(parts)


def cluster_dict(
    result: ClusteringResult, summary: ClusterSummary, unit: str = "auto"
) -> dict:
    return {
        "k": result.model.k,
        "seed": result.seed,
        "alpha": result.model.smoothing_alpha,
        "restarts": result.restarts,
        "iterations": result.iterations,
        "converged": result.converged,
        "reseeds": result.reseed_count,
        "objective_trace": list(result.objective_trace),
        "assignments": dict(result.hard_assignment),
        "memberships": {
            case: [p for _, p in posts] for case, posts in result.memberships.items()
        },
        "clusters": [
            {
                "cluster": b.cluster,
                "cases": b.case_count,
                "events": b.event_count,
                "groups": [
                    {
                        "instances": g.case_count,
                        "case_ids": list(g.case_ids),
                        "events_per_case": g.events_per_case,
                        "max_duration_ms": g.max_case_duration_ms,
                        "max_duration": humanize_duration(g.max_case_duration_ms, unit),
                    }
                    for g in b.groups
                ],
            }
            for b in summary.clusters
        ],
    }


def cluster_csv(summary: ClusterSummary) -> str:
    rows = [["cluster", "instances", "case_ids", "events_per_case", "max_duration_ms"]]
    for b in summary.clusters:
        for g in b.groups:
            rows.append(
                [b.cluster, g.case_count, ";".join(g.case_ids), g.events_per_case,
                 g.max_case_duration_ms]
            )
    return _csv_rows(rows)
