"""Process-mining toolkit: event-log analytics, bottleneck discovery, and
Markov-chain sequence clustering.

The usual pipeline is ingest -> discover -> cluster -> split -> re-analyze:

    from flowmine import io, discovery, clustering

    log, report = io.parse_csv(open("events.csv").read(), io.CsvMapping())
    dfg = discovery.build_dfg(log)
    ranking = discovery.rank_bottlenecks(dfg, mode="total", top_n=10)
    result = clustering.fit(log, k=3, seed=42)
    sub_logs = clustering.split_log(log, result)
"""

from .log import (
    EmptyLogError,
    Event,
    EventLog,
    FrequencyTable,
    LogStats,
    Trace,
    activity_frequency,
    build_log,
    filter_log,
    log_statistics,
)

__all__ = [
    "EmptyLogError",
    "Event",
    "EventLog",
    "FrequencyTable",
    "LogStats",
    "Trace",
    "activity_frequency",
    "build_log",
    "filter_log",
    "log_statistics",
]

__version__ = "0.1.0"
