"""Command-line front end tying the pipeline together.

Subcommands: stats, frequency, variants, map, bottlenecks, cluster, split,
gen. Options may also come from a flat key=value config file (--config);
flags override the file, the file overrides built-in defaults, and the
resolved configuration is fully concrete before anything runs.

Exit codes: 0 success, 1 usage/config error, 2 input parse error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import clustering, discovery, reports, testkit
from .io import CsvMapping, LogParseError, MappingError, parse_csv, parse_mxml, write_csv
from .log import EmptyLogError, EventLog, activity_frequency, log_statistics
from .units import UNITS, humanize_duration  # noqa: F401  (humanize_duration is part of the CLI surface)

__all__ = ["RunConfig", "UsageError", "run", "main", "humanize_duration"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_INTERNAL = 3


class UsageError(ValueError):
    """Bad flags or config values."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters; every field has a concrete value."""

    command: str
    input: str | None
    input_format: str
    case_column: str
    activity_column: str
    timestamp_column: str
    timestamp_format: str
    delimiter: str
    strict: bool
    output: str
    unit: str
    out_dir: str | None
    out: str | None
    mode: str
    top_n: int
    k: int
    seed: int
    alpha: float
    tau: float | None
    restarts: int
    max_iter: int
    tol: float
    spec: str | None
    truth_out: str | None


_DEFAULTS = {
    "input": None,
    "input_format": "csv",
    "case_column": "case_id",
    "activity_column": "activity",
    "timestamp_column": "timestamp",
    "timestamp_format": "rfc3339",
    "delimiter": ",",
    "strict": False,
    "output": "text",
    "unit": "auto",
    "out_dir": None,
    "out": None,
    "mode": None,  # per-command default applied in _resolve
    "top_n": 10,
    "k": 2,
    "seed": 0,
    "alpha": 0.01,
    "tau": None,
    "restarts": 10,
    "max_iter": 100,
    "tol": 1e-6,
    "spec": None,
    "truth_out": None,
}

_MODE_DEFAULT = {"map": "frequency", "bottlenecks": "total"}

_BOOL_STRINGS = {"true": True, "1": True, "yes": True,
                 "false": False, "0": False, "no": False}


def load_config(path: str | Path) -> dict[str, str]:
    """Read a flat key=value file; '#' starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep usage problems on exit code 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flowmine", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ingest = argparse.ArgumentParser(add_help=False)
    ingest.add_argument("--config", help="flat key=value config file")
    ingest.add_argument("-i", "--input", help="event log file")
    ingest.add_argument("--input-format", choices=["csv", "mxml"])
    ingest.add_argument("--case-column")
    ingest.add_argument("--activity-column")
    ingest.add_argument("--timestamp-column")
    ingest.add_argument("--timestamp-format")
    ingest.add_argument("--delimiter")
    ingest.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None)

    report = argparse.ArgumentParser(add_help=False)
    report.add_argument("--output", choices=["text", "json", "csv"])
    report.add_argument("--unit", choices=list(UNITS))
    report.add_argument("--out-dir", help="also write delimited output and figures here")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("-k", type=int, help="number of clusters")
    fitting.add_argument("--seed", type=int)
    fitting.add_argument("--alpha", type=float)
    fitting.add_argument("--tau", type=float, help="posterior overlap threshold")
    fitting.add_argument("--restarts", type=int)
    fitting.add_argument("--max-iter", type=int)
    fitting.add_argument("--tol", type=float)

    sub.add_parser("stats", parents=[ingest, report], help="log statistics")
    sub.add_parser("frequency", parents=[ingest, report], help="activity frequency table")
    sub.add_parser("variants", parents=[ingest, report], help="trace variants")

    p_map = sub.add_parser("map", parents=[ingest], help="process map as DOT")
    p_map.add_argument("--mode", choices=["frequency", "total", "mean", "max"])
    p_map.add_argument("--unit", choices=list(UNITS))
    p_map.add_argument("--out", help="DOT output file (stdout if omitted)")

    p_bn = sub.add_parser("bottlenecks", parents=[ingest, report], help="rank idle times")
    p_bn.add_argument("--mode", choices=["total", "mean", "max"])
    p_bn.add_argument("--top-n", type=int)

    sub.add_parser("cluster", parents=[ingest, report, fitting],
                   help="Markov-chain sequence clustering")

    p_split = sub.add_parser("split", parents=[ingest, fitting],
                             help="cluster, then write one CSV per cluster")
    p_split.add_argument("--out-dir", help="directory for cluster_<i>.csv files")

    p_gen = sub.add_parser("gen", help="generate a synthetic log from a spec file")
    p_gen.add_argument("--config", help="flat key=value config file")
    p_gen.add_argument("--spec", help="generator spec JSON file")
    p_gen.add_argument("--out", help="CSV output file (stdout if omitted)")
    p_gen.add_argument("--truth-out", help="also write case,cluster truth CSV")

    return parser


def _resolve(ns: argparse.Namespace) -> RunConfig:
    config = load_config(ns.config) if getattr(ns, "config", None) else {}
    for key in config:
        if key not in _DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")

    def pick(name: str, cast=str):
        flag = getattr(ns, name, None)
        if flag is not None:
            return flag
        if name in config:
            raw = config[name]
            if cast is bool:
                if raw.lower() not in _BOOL_STRINGS:
                    raise UsageError(f"config {name}: expected true/false, got {raw!r}")
                return _BOOL_STRINGS[raw.lower()]
            try:
                return cast(raw)
            except ValueError:
                raise UsageError(f"config {name}: cannot parse {raw!r}") from None
        return _DEFAULTS[name]

    mode = pick("mode")
    if mode is None:
        mode = _MODE_DEFAULT.get(ns.command, "total")
    return RunConfig(
        command=ns.command,
        input=pick("input"),
        input_format=pick("input_format"),
        case_column=pick("case_column"),
        activity_column=pick("activity_column"),
        timestamp_column=pick("timestamp_column"),
        timestamp_format=pick("timestamp_format"),
        delimiter=pick("delimiter"),
        strict=pick("strict", bool),
        output=pick("output"),
        unit=pick("unit"),
        out_dir=pick("out_dir"),
        out=pick("out"),
        mode=mode,
        top_n=pick("top_n", int),
        k=pick("k", int),
        seed=pick("seed", int),
        alpha=pick("alpha", float),
        tau=pick("tau", float),
        restarts=pick("restarts", int),
        max_iter=pick("max_iter", int),
        tol=pick("tol", float),
        spec=pick("spec"),
        truth_out=pick("truth_out"),
    )


def _load_log(cfg: RunConfig) -> EventLog:
    if not cfg.input:
        raise UsageError("no input file given (use --input or config)")
    text = Path(cfg.input).read_text(encoding="utf-8-sig")
    if cfg.input_format == "mxml":
        log, report = parse_mxml(text)
    else:
        mapping = CsvMapping(
            case_column=cfg.case_column,
            activity_column=cfg.activity_column,
            timestamp_column=cfg.timestamp_column,
            timestamp_format=cfg.timestamp_format,
            delimiter=cfg.delimiter,
        )
        log, report = parse_csv(text, mapping, strict=cfg.strict)
    if report.rows_rejected:
        print(f"warning: {report.rows_rejected} rows rejected", file=sys.stderr)
        for locator, message in report.first_errors:
            print(f"  {locator}: {message}", file=sys.stderr)
    return log


def _out_dir(cfg: RunConfig) -> Path:
    assert cfg.out_dir is not None
    path = Path(cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _figures():
    # Deferred: pulls in matplotlib, which is only needed when --out-dir asks
    # for rendered charts.
    from . import figures

    return figures


def _emit(cfg: RunConfig, text: str, payload: dict, delimited: str) -> None:
    if cfg.output == "json":
        print(reports.to_json(payload), end="")
    elif cfg.output == "csv":
        print(delimited, end="")
    else:
        print(text, end="")


def _cmd_stats(cfg: RunConfig) -> int:
    log = _load_log(cfg)
    stats = log_statistics(log)
    _emit(cfg, reports.stats_text(stats, cfg.unit),
          reports.stats_dict(stats, cfg.unit), reports.stats_csv(stats))
    if cfg.out_dir:
        out = _out_dir(cfg)
        (out / "stats.csv").write_text(reports.stats_csv(stats), encoding="utf-8")
        _figures().save_case_duration_hist(log, out / "case_durations.png")
    return EXIT_OK


def _cmd_frequency(cfg: RunConfig) -> int:
    log = _load_log(cfg)
    table = activity_frequency(log)
    _emit(cfg, reports.frequency_text(table),
          reports.frequency_dict(table), reports.frequency_csv(table))
    if cfg.out_dir:
        out = _out_dir(cfg)
        (out / "activity_frequency.csv").write_text(
            reports.frequency_csv(table), encoding="utf-8")
        _figures().save_frequency_chart(table, out / "activity_frequency.png")
    return EXIT_OK


def _cmd_variants(cfg: RunConfig) -> int:
    log = _load_log(cfg)
    variants = discovery.extract_variants(log)
    _emit(cfg, reports.variants_text(variants, cfg.unit),
          reports.variants_dict(variants, cfg.unit), reports.variants_csv(variants))
    if cfg.out_dir:
        out = _out_dir(cfg)
        (out / "variants.csv").write_text(reports.variants_csv(variants), encoding="utf-8")
        _figures().save_variant_duration_chart(variants, out / "variant_durations.png")
    return EXIT_OK


def _cmd_map(cfg: RunConfig) -> int:
    log = _load_log(cfg)
    dot = discovery.export_dot(discovery.build_dfg(log), mode=cfg.mode, unit=cfg.unit)
    if cfg.out:
        Path(cfg.out).write_text(dot, encoding="utf-8")
    else:
        print(dot, end="")
    return EXIT_OK


def _cmd_bottlenecks(cfg: RunConfig) -> int:
    log = _load_log(cfg)
    report = discovery.rank_bottlenecks(
        discovery.build_dfg(log), mode=cfg.mode, top_n=cfg.top_n)
    _emit(cfg, reports.bottlenecks_text(report, cfg.unit),
          reports.bottlenecks_dict(report, cfg.unit), reports.bottlenecks_csv(report))
    if cfg.out_dir:
        out = _out_dir(cfg)
        (out / "bottlenecks.csv").write_text(reports.bottlenecks_csv(report), encoding="utf-8")
        if report.entries:
            _figures().save_bottleneck_chart(report, out / "bottlenecks.png")
    return EXIT_OK


def _cmd_cluster(cfg: RunConfig) -> int:
    log = _load_log(cfg)
    result = clustering.fit(
        log, k=cfg.k, seed=cfg.seed, alpha=cfg.alpha,
        max_iter=cfg.max_iter, tol=cfg.tol, restarts=cfg.restarts)
    sub_logs = clustering.split_log(log, result, tau=cfg.tau)
    summary = clustering.summarize_clusters(sub_logs)
    _emit(cfg, reports.cluster_text(result, summary, cfg.unit),
          reports.cluster_dict(result, summary, cfg.unit), reports.cluster_csv(summary))
    if cfg.out_dir:
        out = _out_dir(cfg)
        (out / "cluster_summary.csv").write_text(reports.cluster_csv(summary), encoding="utf-8")
        figs = _figures()
        figs.save_cluster_size_chart(summary, out / "cluster_sizes.png")
        figs.save_objective_trace_chart(result, out / "objective_trace.png")
    return EXIT_OK


def _cmd_split(cfg: RunConfig) -> int:
    if not cfg.out_dir:
        raise UsageError("split needs --out-dir for the cluster_<i>.csv files")
    log = _load_log(cfg)
    result = clustering.fit(
        log, k=cfg.k, seed=cfg.seed, alpha=cfg.alpha,
        max_iter=cfg.max_iter, tol=cfg.tol, restarts=cfg.restarts)
    sub_logs = clustering.split_log(log, result, tau=cfg.tau)
    out = _out_dir(cfg)
    for i, sub in enumerate(sub_logs):
        path = out / f"cluster_{i}.csv"
        path.write_text(write_csv(sub), encoding="utf-8")
        print(f"cluster_{i}.csv: {sub.case_count} cases, {sub.event_count} events")
    return EXIT_OK


def _cmd_gen(cfg: RunConfig) -> int:
    if not cfg.spec:
        raise UsageError("gen needs --spec pointing at a generator spec JSON file")
    labeled = testkit.generate(testkit.load_spec(cfg.spec))
    text = write_csv(labeled.log)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
        print(f"{cfg.out}: {labeled.log.case_count} cases, "
              f"{labeled.log.event_count} events")
    else:
        print(text, end="")
    if cfg.truth_out:
        lines = ["case_id,cluster"]
        lines += [f"{case},{cluster}" for case, cluster in labeled.truth.items()]
        Path(cfg.truth_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


_COMMANDS = {
    "stats": _cmd_stats,
    "frequency": _cmd_frequency,
    "variants": _cmd_variants,
    "map": _cmd_map,
    "bottlenecks": _cmd_bottlenecks,
    "cluster": _cmd_cluster,
    "split": _cmd_split,
    "gen": _cmd_gen,
}


def run(argv: list[str] | None = None) -> int:
    """Parse argv, execute the subcommand, and return the exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = _resolve(ns)
        return _COMMANDS[cfg.command](cfg)
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MappingError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LogParseError, EmptyLogError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (clustering.AssignmentError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())
