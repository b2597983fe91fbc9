from datetime import timedelta, timezone

import pytest
from hypothesis import given, settings

from flowmine.io import (
    CsvMapping,
    LogParseError,
    MappingError,
    format_timestamp,
    parse_csv,
    parse_mxml,
    parse_timestamp,
    write_csv,
)
from flowmine.log import build_log
from helpers import BASE, TRICKY_ACTIVITIES, ev, random_logs


class TestTimestamps:
    def test_rfc3339_zulu(self):
        assert parse_timestamp("2019-01-01T01:00:00Z") == BASE.replace(
            year=2019, hour=1)

    def test_rfc3339_offset_normalized_to_utc(self):
        dt = parse_timestamp("2019-01-01T03:00:00+02:00")
        assert dt == parse_timestamp("2019-01-01T01:00:00Z")
        assert dt.tzinfo == timezone.utc

    def test_naive_read_as_utc(self):
        dt = parse_timestamp("2019-01-01 01:00:00")
        assert dt.tzinfo == timezone.utc

    def test_strptime_pattern(self):
        dt = parse_timestamp("01/02/2019 13:45", "%d/%m/%Y %H:%M")
        assert (dt.day, dt.month, dt.hour) == (1, 2, 13)

    def test_format_trims_fraction(self):
        assert format_timestamp(BASE) == "2020-01-01T00:00:00Z"
        assert format_timestamp(BASE + timedelta(milliseconds=120)) == (
            "2020-01-01T00:00:00.120Z")
        assert format_timestamp(BASE + timedelta(microseconds=1)) == (
            "2020-01-01T00:00:00.000001Z")


class TestParseCsv:
    def test_minimal_file(self):
        log, report = parse_csv("case_id,activity,timestamp\nc1,A,2020-01-01T00:00:00Z\n")
        assert log.case_count == 1
        assert log.event_count == 1
        assert report.events_parsed == 1
        assert report.rows_rejected == 0

    def test_bad_timestamp_skipped_when_lenient(self):
        text = (
            "case_id,activity,timestamp\n"
            "c1,A,not-a-date\n"
            "c1,B,2020-01-01T00:00:00Z\n"
        )
        log, report = parse_csv(text, strict=False)
        assert report.rows_rejected == 1
        assert log.event_count == 1
        assert report.first_errors[0][0] == "line 2"

    def test_bad_timestamp_aborts_when_strict(self):
        text = "case_id,activity,timestamp\nc1,A,not-a-date\n"
        with pytest.raises(LogParseError, match="line 2"):
            parse_csv(text, strict=True)

    def test_missing_mapped_column_is_config_error(self):
        with pytest.raises(MappingError, match="wrong"):
            parse_csv("a,b,c\n1,2,3\n", CsvMapping(case_column="wrong"))

    def test_empty_case_and_activity_fields_are_row_errors(self):
        text = (
            "case_id,activity,timestamp\n"
            ",A,2020-01-01T00:00:00Z\n"
            "c1,,2020-01-01T00:00:00Z\n"
        )
        log, report = parse_csv(text)
        assert report.rows_rejected == 2
        assert log.event_count == 0

    def test_report_counts_cover_all_rows(self):
        text = (
            "case_id,activity,timestamp\n"
            "c1,A,2020-01-01T00:00:00Z\n"
            "c1,B,bogus\n"
            "c2,C,2020-01-02T00:00:00Z\n"
            "short\n"
        )
        log, report = parse_csv(text)
        assert report.events_parsed + report.rows_rejected == 4
        assert report.events_parsed == 2

    def test_custom_mapping_and_delimiter(self):
        text = "who;what;when\nc1;A;2020-01-01 00:00:00\n"
        mapping = CsvMapping(
            case_column="who", activity_column="what", timestamp_column="when",
            delimiter=";")
        log, _ = parse_csv(text, mapping)
        assert log.trace("c1").activities == ("A",)

    def test_mapping_requires_distinct_columns(self):
        with pytest.raises(MappingError, match="distinct"):
            CsvMapping(case_column="x", activity_column="x")

    def test_no_header_is_config_error(self):
        with pytest.raises(MappingError, match="header"):
            parse_csv("")

    def test_deterministic(self):
        text = "case_id,activity,timestamp\nc1,A,2020-01-01T00:00:00Z\nc1,B,bad\n"
        first = parse_csv(text)
        second = parse_csv(text)
        assert first[0] == second[0]
        assert first[1] == second[1]


class TestWriteCsv:
    def test_empty_log_writes_header_only(self):
        assert write_csv(build_log([])) == "case_id,activity,timestamp\n"

    def test_field_with_delimiter_is_quoted(self):
        log = build_log([ev("c1", "cut, sew", 0)])
        assert '"cut, sew"' in write_csv(log)

    def test_quote_doubling(self):
        log = build_log([ev("c1", 'say "hi"', 0)])
        assert '"say ""hi"""' in write_csv(log)

    def test_round_trip_tricky_activities(self):
        events = [ev("c1", a, i) for i, a in enumerate(TRICKY_ACTIVITIES)]
        events += [ev("c 2,x", "plain", 7, ms=250)]
        log = build_log(events)
        parsed, report = parse_csv(write_csv(log))
        assert parsed == log
        assert report.rows_rejected == 0

    @given(random_logs(activities=TRICKY_ACTIVITIES))
    @settings(max_examples=60)
    def test_round_trip_identity(self, log):
        assert parse_csv(write_csv(log))[0] == log


MINIMAL_MXML = """<?xml version="1.0"?>
<WorkflowLog><Process><ProcessInstance id="p1">
<AuditTrailEntry>
  <WorkflowModelElement>Weaving</WorkflowModelElement>
  <EventType>complete</EventType>
  <Timestamp>2020-01-01T00:00:00Z</Timestamp>
</AuditTrailEntry>
</ProcessInstance></Process></WorkflowLog>
"""


class TestParseMxml:
    def test_minimal_document(self):
        log, report = parse_mxml(MINIMAL_MXML)
        assert log.case_count == 1
        assert log.event_count == 1
        assert report.events_parsed == 1

    def test_golden_file(self, mxml_path):
        log, report = parse_mxml(mxml_path.read_text(encoding="utf-8"))
        assert log.event_count == 3
        assert log.case_count == 2
        assert report.rows_rejected == 0
        assert log.trace("case_1").activities == ("Blending", "Weaving")
        assert log.trace("case_2").activities == ("Weaving",)

    def test_start_events_filtered_silently(self):
        text = MINIMAL_MXML.replace("complete", "start")
        log, report = parse_mxml(text)
        assert log.event_count == 0
        assert report.rows_rejected == 0

    def test_filter_override(self):
        text = MINIMAL_MXML.replace("complete", "start")
        log, _ = parse_mxml(text, event_type_filter={"start"})
        assert log.event_count == 1

    def test_missing_timestamp_rejected(self):
        text = MINIMAL_MXML.replace(
            "<Timestamp>2020-01-01T00:00:00Z</Timestamp>", "")
        log, report = parse_mxml(text)
        assert log.event_count == 0
        assert report.rows_rejected == 1
        assert "Timestamp" in report.first_errors[0][1]

    def test_missing_workflow_element_rejected(self):
        text = MINIMAL_MXML.replace(
            "<WorkflowModelElement>Weaving</WorkflowModelElement>", "")
        _, report = parse_mxml(text)
        assert report.rows_rejected == 1

    def test_instance_without_id_rejected(self):
        text = MINIMAL_MXML.replace(' id="p1"', "")
        log, report = parse_mxml(text)
        assert log.event_count == 0
        assert report.rows_rejected == 1
        assert "id" in report.first_errors[0][1]

    def test_malformed_xml_raises(self):
        with pytest.raises(LogParseError, match="malformed"):
            parse_mxml("<WorkflowLog><unclosed>")

    def test_csv_and_mxml_encodings_agree(self, mxml_path):
        mxml_log, _ = parse_mxml(mxml_path.read_text(encoding="utf-8"))
        csv_log, _ = parse_csv(write_csv(mxml_log))
        assert csv_log == mxml_log
