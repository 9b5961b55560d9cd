"""Machine-readable and human-readable renderings of a :class:`ConversionReport`."""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Mapping, Sequence
from datetime import datetime
from pathlib import Path
from typing import IO

from taxonomy_owl.builder import ConversionReport, Outcome, ReportEntry
from taxonomy_owl.cache import CacheStore

logger = logging.getLogger(__name__)

REPORT_COLUMNS = (
    "input",
    "normalized",
    "outcome",
    "status",
    "matchType",
    "confidence",
    "acceptedName",
    "acceptedKey",
    "detail",
)

CHECK_COLUMNS = ("input", "normalized", "status", "matchType", "confidence", "acceptedName", "acceptedKey", "detail")


def _row(entry: ReportEntry) -> dict[str, str]:
    return {
        "input": entry.input_name,
        "normalized": entry.normalized,
        "outcome": entry.outcome.value,
        "status": "FAILED" if entry.outcome is Outcome.FAILED else entry.status,
        "matchType": entry.match_type,
        "confidence": "" if entry.confidence is None else str(entry.confidence),
        "acceptedName": entry.accepted_name,
        "acceptedKey": "" if entry.accepted_key is None else str(entry.accepted_key),
        "detail": entry.detail,
    }


def report_rows(report: ConversionReport, columns: Sequence[str] = REPORT_COLUMNS) -> list[dict[str, str]]:
    """One dict per entry, limited to *columns*, in input order."""
    return [{column: row[column] for column in columns} for row in map(_row, report.entries)]


def write_csv(
    report: ConversionReport,
    target: str | Path | IO[str],
    columns: Sequence[str] = REPORT_COLUMNS,
    extra: Mapping[int, Mapping[str, str]] | None = None,
) -> None:
    """Write *report* as comma-separated text with a header row.

    Args:
        report: Entries to write.
        target: Path or open text stream.
        columns: Columns to include, in order.
        extra: Additional cells keyed by entry index; their column names
            are appended to the header in first-seen order.
    """
    rows = report_rows(report, columns)
    fieldnames = list(columns)
    for index, cells in (extra or {}).items():
        rows[index].update(cells)
        fieldnames.extend(name for name in cells if name not in fieldnames)

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            _write_rows(fh, fieldnames, rows, delimiter=",")
        logger.info("wrote report for %d names to %s", len(rows), target)
    else:
        _write_rows(target, fieldnames, rows, delimiter=",")


def format_table(
    report: ConversionReport,
    columns: Sequence[str] = CHECK_COLUMNS,
    extra: Mapping[int, Mapping[str, str]] | None = None,
) -> str:
    """Render *report* as a tab-separated table with a header row."""
    rows = report_rows(report, columns)
    fieldnames = list(columns)
    for index, cells in (extra or {}).items():
        rows[index].update(cells)
        fieldnames.extend(name for name in cells if name not in fieldnames)
    buffer = io.StringIO()
    _write_rows(buffer, fieldnames, rows, delimiter="\t")
    return buffer.getvalue()


def _write_rows(fh: IO[str], fieldnames: Sequence[str], rows: Sequence[Mapping[str, str]], delimiter: str) -> None:
    writer = csv.DictWriter(fh, fieldnames=fieldnames, delimiter=delimiter, lineterminator="\n", restval="")
    writer.writeheader()
    writer.writerows(rows)


# ----------------------------------------------------------------------
# Summary
# ----------------------------------------------------------------------


def _age(then: datetime, now: datetime) -> str:
    seconds = max(0, int((now - then).total_seconds()))
    days, rest = divmod(seconds, 86400)
    if days:
        return f"{days} d"
    hours, rest = divmod(rest, 3600)
    return f"{hours} h" if hours else f"{rest // 60} min"


def summarize(report: ConversionReport, store: CacheStore | None = None, now: datetime | None = None) -> str:
    """Human summary: outcome counts, failed names and cached-response ages."""
    counts = report.counts
    lines = [
        f"{len(report)} names: "
        f"{counts[Outcome.ACCEPTED]} accepted, "
        f"{counts[Outcome.SYNONYM_REPLACED]} synonym replaced, "
        f"{counts[Outcome.FUZZY_MATCHED]} fuzzy matched, "
        f"{counts[Outcome.FAILED]} failed"
    ]
    for entry in report.entries:
        if entry.outcome is Outcome.FUZZY_MATCHED:
            lines.append(f"  review {entry.input_name}: {entry.detail}")
    for entry in report.failed:
        lines.append(f"  failed {entry.input_name}: {entry.detail}")

    if store is not None and len(store):
        oldest, newest = store.oldest_fetched_at(), store.newest_fetched_at()
        assert oldest is not None and newest is not None
        now = now or datetime.now(oldest.tzinfo)
        lines.append(
            f"cached responses: {len(store)}, fetched {oldest.isoformat()} to {newest.isoformat()} "
            f"(oldest {_age(oldest, now)} old)"
        )
    return "\n".join(lines) + "\n"
