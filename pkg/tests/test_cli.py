import json
import re

import pytest

from flowmine.cli import humanize_duration, load_config, run
from flowmine.io import parse_csv


def run_capture(capsys, argv):
    code = run(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestStats:
    def test_table_shape(self, capsys, textile_path):
        code, out, _ = run_capture(capsys, ["stats", "-i", str(textile_path)])
        assert code == 0
        assert re.search(r"^Events\s+443$", out, re.M)
        assert re.search(r"^Cases\s+33$", out, re.M)
        assert re.search(r"^Activities\s+14$", out, re.M)

    def test_json_round_trips_text_rendering(self, capsys, textile_path):
        code, out, _ = run_capture(
            capsys, ["stats", "-i", str(textile_path), "--output", "json",
                     "--unit", "weeks"])
        assert code == 0
        payload = json.loads(out)
        assert payload["events"] == 443
        # The JSON and text reports agree: humanizing the raw value gives the
        # displayed string.
        assert humanize_duration(payload["median_case_duration_ms"], "weeks") == (
            payload["median_case_duration"])


class TestFrequency:
    def test_json_top_row(self, capsys, textile_path):
        code, out, _ = run_capture(
            capsys, ["frequency", "-i", str(textile_path), "--output", "json"])
        assert code == 0
        rows = json.loads(out)["rows"]
        assert rows[0]["activity"] == "Weaving"
        assert rows[0]["frequency"] == 162
        assert round(rows[0]["relative"], 2) == 36.57

    def test_text_rounds_to_two_decimals(self, capsys, textile_path):
        _, out, _ = run_capture(capsys, ["frequency", "-i", str(textile_path)])
        assert re.search(r"^Weaving\s+162\s+36\.57$", out, re.M)


class TestDeterminism:
    def test_cluster_json_byte_identical(self, capsys, textile_path):
        argv = ["cluster", "-i", str(textile_path), "-k", "2", "--seed", "7",
                "--output", "json"]
        code1, out1, _ = run_capture(capsys, argv)
        code2, out2, _ = run_capture(capsys, argv)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_map_byte_identical(self, capsys, textile_path):
        argv = ["map", "-i", str(textile_path), "--mode", "mean", "--unit", "days"]
        _, out1, _ = run_capture(capsys, argv)
        _, out2, _ = run_capture(capsys, argv)
        assert out1 == out2
        assert out1.startswith("digraph")


class TestMap:
    def test_writes_dot_file(self, capsys, textile_path, tmp_path):
        target = tmp_path / "map.dot"
        code, out, _ = run_capture(
            capsys, ["map", "-i", str(textile_path), "--out", str(target)])
        assert code == 0
        assert target.read_text().startswith("digraph")


class TestBottlenecks:
    def test_ranking_modes(self, capsys, textile_path):
        for mode in ("total", "mean", "max"):
            code, out, _ = run_capture(
                capsys, ["bottlenecks", "-i", str(textile_path), "--mode", mode,
                         "--output", "json"])
            assert code == 0
            payload = json.loads(out)
            assert payload["mode"] == mode
            scores = [e["score_ms"] for e in payload["edges"]]
            assert scores == sorted(scores, reverse=True)

    def test_top_n(self, capsys, textile_path):
        _, out, _ = run_capture(
            capsys, ["bottlenecks", "-i", str(textile_path), "--top-n", "2",
                     "--output", "json"])
        assert len(json.loads(out)["edges"]) == 2


class TestSplit:
    def test_writes_cluster_files(self, capsys, textile_path, tmp_path):
        code, out, _ = run_capture(
            capsys, ["split", "-i", str(textile_path), "-k", "2", "--seed", "3",
                     "--out-dir", str(tmp_path)])
        assert code == 0
        files = sorted(p.name for p in tmp_path.glob("cluster_*.csv"))
        assert files == ["cluster_0.csv", "cluster_1.csv"]
        total_cases = 0
        for name in files:
            sub, _ = parse_csv((tmp_path / name).read_text())
            total_cases += sub.case_count
        assert total_cases == 33  # hard split partitions the cases


class TestGen:
    def test_generates_parseable_csv(self, capsys, two_chain_spec_path, tmp_path):
        out_file = tmp_path / "synthetic.csv"
        truth_file = tmp_path / "truth.csv"
        code, _, _ = run_capture(
            capsys, ["gen", "--spec", str(two_chain_spec_path),
                     "--out", str(out_file), "--truth-out", str(truth_file)])
        assert code == 0
        log, report = parse_csv(out_file.read_text())
        assert report.rows_rejected == 0
        assert log.case_count == 40
        truth_lines = truth_file.read_text().strip().splitlines()
        assert truth_lines[0] == "case_id,cluster"
        assert len(truth_lines) == 41

    def test_stdout_default_deterministic(self, capsys, two_chain_spec_path):
        argv = ["gen", "--spec", str(two_chain_spec_path)]
        _, out1, _ = run_capture(capsys, argv)
        _, out2, _ = run_capture(capsys, argv)
        assert out1 == out2
        assert out1.startswith("case_id,activity,timestamp")


class TestFigures:
    def test_report_path_writes_csv_and_png(self, capsys, textile_path, tmp_path):
        cases = [
            (["frequency"], ["activity_frequency.csv", "activity_frequency.png"]),
            (["variants"], ["variants.csv", "variant_durations.png"]),
            (["bottlenecks"], ["bottlenecks.csv", "bottlenecks.png"]),
            (["stats"], ["stats.csv", "case_durations.png"]),
            (["cluster", "-k", "2", "--seed", "1"],
             ["cluster_summary.csv", "cluster_sizes.png", "objective_trace.png"]),
        ]
        for argv, expected in cases:
            out_dir = tmp_path / argv[0]
            code, _, _ = run_capture(
                capsys, argv + ["-i", str(textile_path), "--out-dir", str(out_dir)])
            assert code == 0
            for name in expected:
                target = out_dir / name
                assert target.exists(), f"{argv[0]} did not write {name}"
                assert target.stat().st_size > 0


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, capsys, textile_path,
                                                     tmp_path):
        config = tmp_path / "run.conf"
        config.write_text(
            f"input = {textile_path}\n"
            "unit = weeks\n"
            "output = json\n"
            "# comment line\n"
        )
        code, out, _ = run_capture(capsys, ["stats", "--config", str(config)])
        assert code == 0
        assert json.loads(out)["median_case_duration"].endswith("weeks")

        code, out, _ = run_capture(
            capsys, ["stats", "--config", str(config), "--unit", "days"])
        assert json.loads(out)["median_case_duration"].endswith("days")

    def test_unknown_config_key(self, capsys, tmp_path):
        config = tmp_path / "bad.conf"
        config.write_text("no_such_option = 1\n")
        code, _, err = run_capture(capsys, ["stats", "--config", str(config)])
        assert code == 1
        assert "no_such_option" in err

    def test_malformed_config_line(self, tmp_path):
        config = tmp_path / "bad.conf"
        config.write_text("just a line without equals\n")
        with pytest.raises(Exception):
            load_config(config)


class TestExitCodes:
    def test_missing_input_is_usage_error(self, capsys):
        code, _, err = run_capture(capsys, ["stats"])
        assert code == 1
        assert "input" in err

    def test_unknown_command_is_usage_error(self, capsys):
        code, _, _ = run_capture(capsys, ["frobnicate"])
        assert code == 1

    def test_missing_column_is_usage_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        code, _, err = run_capture(capsys, ["stats", "-i", str(bad)])
        assert code == 1

    def test_strict_parse_error_is_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("case_id,activity,timestamp\nc1,A,not-a-date\n")
        code, _, err = run_capture(capsys, ["stats", "-i", str(bad), "--strict"])
        assert code == 2
        assert "line 2" in err

    def test_empty_log_is_exit_2(self, capsys, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("case_id,activity,timestamp\n")
        code, _, _ = run_capture(capsys, ["stats", "-i", str(empty)])
        assert code == 2

    def test_lenient_parse_warns_but_succeeds(self, capsys, tmp_path):
        mixed = tmp_path / "mixed.csv"
        mixed.write_text(
            "case_id,activity,timestamp\n"
            "c1,A,2020-01-01T00:00:00Z\n"
            "c1,B,bogus\n")
        code, out, err = run_capture(capsys, ["stats", "-i", str(mixed)])
        assert code == 0
        assert "1 rows rejected" in err

    def test_help_exits_zero(self, capsys):
        code, out, _ = run_capture(capsys, ["--help"])
        assert code == 0
        assert "stats" in out

    def test_mxml_input(self, capsys, mxml_path):
        code, out, _ = run_capture(
            capsys, ["stats", "-i", str(mxml_path), "--input-format", "mxml"])
        assert code == 0
        assert re.search(r"^Events\s+3$", out, re.M)
