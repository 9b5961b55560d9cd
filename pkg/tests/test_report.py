"""Tests for report rendering."""

from __future__ import annotations

import csv
import io
from datetime import datetime, timedelta, timezone
from pathlib import Path

from taxonomy_owl.builder import ConversionReport, Outcome, ReportEntry, build
from taxonomy_owl.cache import CacheEntry, CacheStore
from taxonomy_owl.client import GbifClient
from taxonomy_owl.names import RawNameEntry
from taxonomy_owl.report import CHECK_COLUMNS, REPORT_COLUMNS, format_table, report_rows, summarize, write_csv

T0 = datetime(2025, 3, 6, tzinfo=timezone.utc)


def _report() -> ConversionReport:
    return ConversionReport(
        [
            ReportEntry("Apis mellifera", Outcome.ACCEPTED, normalized="Apis mellifera", status="ACCEPTED",
                        match_type="EXACT", confidence=99, accepted_name="Apis mellifera", accepted_key=1341976),
            ReportEntry("Arapauma gigas", Outcome.FUZZY_MATCHED, "fuzzy match to Arapaima gigas; review",
                        "Arapauma gigas", "ACCEPTED", "FUZZY", 94, "Arapaima gigas", 2402253),
            ReportEntry("Zzzz qqq", Outcome.FAILED, "no match for 'Zzzz qqq'", "Zzzz qqq", match_type="NONE"),
        ]
    )


class TestRows:
    def test_failed_status(self):
        rows = report_rows(_report())
        assert rows[2]["status"] == "FAILED"
        assert rows[2]["confidence"] == ""
        assert rows[2]["acceptedKey"] == ""

    def test_columns(self):
        assert list(report_rows(_report(), CHECK_COLUMNS)[0]) == list(CHECK_COLUMNS)


class TestWriteCsv:
    def test_to_path(self, tmp_path: Path):
        path = tmp_path / "r.csv"
        write_csv(_report(), path)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == list(REPORT_COLUMNS)
        assert [r["outcome"] for r in rows] == ["ACCEPTED", "FUZZY_MATCHED", "FAILED"]
        assert rows[1]["detail"] == "fuzzy match to Arapaima gigas; review"

    def test_extra_columns(self):
        buffer = io.StringIO()
        write_csv(_report(), buffer, CHECK_COLUMNS, extra={0: {"synonyms": ""}, 1: {"synonyms": "x"}})
        header = buffer.getvalue().splitlines()[0]
        assert header.endswith(",synonyms")


class TestFormatTable:
    def test_tab_separated(self, fixture_client: GbifClient):
        _, report = build([RawNameEntry("Capra hircus")], fixture_client)
        lines = format_table(report).splitlines()
        assert lines[0].split("\t") == list(CHECK_COLUMNS)
        row = dict(zip(CHECK_COLUMNS, lines[1].split("\t")))
        assert row["status"] == "SYNONYM"
        assert row["acceptedName"] == "Capra aegagrus"
        assert row["acceptedKey"] == "2441047"


class TestSummarize:
    def test_counts_and_lists(self):
        text = summarize(_report())
        assert text.splitlines()[0] == "3 names: 1 accepted, 0 synonym replaced, 1 fuzzy matched, 1 failed"
        assert "  review Arapauma gigas: fuzzy match to Arapaima gigas; review" in text
        assert "  failed Zzzz qqq: no match for 'Zzzz qqq'" in text
        assert "cached responses" not in text

    def test_cache_ages(self, tmp_path: Path):
        store = CacheStore(tmp_path)
        store.put(CacheEntry("species/1", b"", T0))
        store.put(CacheEntry("species/6", b"", T0 + timedelta(days=1)))
        text = summarize(_report(), store, now=T0 + timedelta(days=3))
        assert (
            "cached responses: 2, fetched 2025-03-06T00:00:00+00:00 to 2025-03-07T00:00:00+00:00 (oldest 3 d old)"
            in text
        )
