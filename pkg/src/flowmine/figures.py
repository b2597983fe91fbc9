"""Chart renderings of the report tables, saved as PNG next to the CSVs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .clustering import ClusteringResult, ClusterSummary
from .discovery import BottleneckReport, Variant
from .log import EventLog, FrequencyTable
from .units import UNIT_SECONDS

__all__ = [
    "save_case_duration_hist",
    "save_frequency_chart",
    "save_variant_duration_chart",
    "save_bottleneck_chart",
    "save_cluster_size_chart",
    "save_objective_trace_chart",
]

DPI = 150


def _scaled(values_ms: list[float]) -> tuple[list[float], str]:
    """Scale millisecond values into the largest unit where the max is >= 1."""
    top = max(values_ms, default=0.0) / 1000.0
    for name, size in UNIT_SECONDS.items():
        if top / size >= 1.0:
            return [v / 1000.0 / size for v in values_ms], name
    return list(values_ms), "ms"


def _finish(fig, path: Path | str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def save_case_duration_hist(log: EventLog, path: Path | str) -> None:
    durations, unit = _scaled([float(t.duration_ms) for t in log.traces])
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.hist(durations, bins=min(30, max(len(durations), 5)), color="steelblue",
            edgecolor="black", alpha=0.8)
    ax.set_xlabel(f"Case duration ({unit})")
    ax.set_ylabel("Cases")
    ax.set_title("Case duration distribution")
    ax.grid(axis="y", alpha=0.3)
    _finish(fig, path)


def save_frequency_chart(table: FrequencyTable, path: Path | str, top_n: int = 20) -> None:
    rows = table.rows[:top_n]
    fig, ax = plt.subplots(figsize=(8, max(3, 0.4 * len(rows))))
    ax.barh([r.activity for r in rows], [r.frequency for r in rows],
            color="steelblue", edgecolor="black")
    ax.invert_yaxis()
    ax.set_xlabel("Frequency")
    ax.set_title("Activity frequency")
    ax.grid(axis="x", alpha=0.3)
    _finish(fig, path)


def save_variant_duration_chart(variants: list[Variant], path: Path | str) -> None:
    values, unit = _scaled([float(v.max_case_duration_ms) for v in variants])
    labels = [str(i) for i in range(1, len(variants) + 1)]
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(variants)), 5))
    ax.bar(labels, values, color="coral", edgecolor="black")
    ax.set_xlabel("Variant")
    ax.set_ylabel(f"Max case duration ({unit})")
    ax.set_title("Time duration for each variant")
    ax.grid(axis="y", alpha=0.3)
    _finish(fig, path)


def save_bottleneck_chart(report: BottleneckReport, path: Path | str) -> None:
    values, unit = _scaled([e.score_ms for e in report.entries])
    labels = [f"{e.edge.source} -> {e.edge.target}" for e in report.entries]
    fig, ax = plt.subplots(figsize=(8, max(3, 0.4 * len(labels))))
    colors = ["firebrick" if e.flagged else "steelblue" for e in report.entries]
    ax.barh(labels, values, color=colors, edgecolor="black")
    ax.invert_yaxis()
    ax.set_xlabel(f"Idle time, {report.mode} ({unit})")
    ax.set_title("Bottleneck ranking")
    ax.grid(axis="x", alpha=0.3)
    _finish(fig, path)


def save_cluster_size_chart(summary: ClusterSummary, path: Path | str) -> None:
    labels = [str(b.cluster) for b in summary.clusters]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.bar(labels, [b.case_count for b in summary.clusters], color="steelblue",
           edgecolor="black", label="cases")
    ax.bar(labels, [b.event_count for b in summary.clusters], color="coral",
           edgecolor="black", alpha=0.5, label="events")
    ax.set_xlabel("Cluster")
    ax.set_title("Cluster sizes")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    _finish(fig, path)


def save_objective_trace_chart(result: ClusteringResult, path: Path | str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(range(1, len(result.objective_trace) + 1), result.objective_trace,
            marker="o", linewidth=2)
    ax.set_xlabel("Iteration")
    ax.set_ylabel("Objective (sum of best log-likelihoods)")
    ax.set_title("EM objective trace")
    ax.grid(alpha=0.3)
    _finish(fig, path)
