"""Flow-log CSV ingestion: parse, clean, de-duplicate, roll up to a series.

Input files are RFC-4180 CSV with a header row. Timestamps are day-first
12-hour clock with AM/PM ("dd/MM/yyyy hh:mm:ss AM/PM"); anything else is a
parse failure, never a guess. All instants are treated as UTC.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .errors import (
    EmptyInput,
    IoFailure,
    MalformedHeader,
    MissingColumn,
    TimestampParseError,
)
from .series import TimeSeries

TIMESTAMP_FORMAT = "%d/%m/%Y %I:%M:%S %p"

FLOW_COLUMNS = [
    "Flow ID",
    "Timestamp",
    "Fwd Pkt Len Mean",
    "Fwd Seg Size Avg",
    "Init Fwd Win Byts",
    "Init Bwd Win Byts",
    "Fwd Seg Size Min",
]

WIN_BYTES_SENTINEL = -1  # "window size absent" marker used in flow logs


def parse_timestamp(text: str) -> datetime:
    try:
        return datetime.strptime(text.strip(), TIMESTAMP_FORMAT).replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise TimestampParseError(f"bad timestamp {text!r}") from exc


def format_timestamp(dt: datetime) -> str:
    return dt.strftime(TIMESTAMP_FORMAT)


def _coerce_float(text) -> float | None:
    if text is None:
        return None
    try:
        v = float(text)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def _coerce_int(text, default: int) -> int:
    try:
        return int(float(text))
    except (TypeError, ValueError):
        return default


@dataclass(frozen=True)
class FlowRecord:
    """One parsed flow-log row."""

    flow_id: str
    timestamp: datetime
    fwd_pkt_len_mean: float | None
    fwd_seg_size_avg: float | None
    init_fwd_win_byts: int
    init_bwd_win_byts: int
    fwd_seg_size_min: int
    value: float | None  # the selected value column, None when missing

    @property
    def is_clean(self) -> bool:
        return self.value is not None and math.isfinite(self.value)

    @property
    def source_ip(self) -> str:
        """Leading address of the flow tuple (the reporting device)."""
        return self.flow_id.split("-", 1)[0]


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_dropped_missing: int = 0
    rows_dropped_duplicate: int = 0
    series_start: datetime | None = None
    series_end: datetime | None = None

    def to_json_obj(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_dropped_missing": self.rows_dropped_missing,
            "rows_dropped_duplicate": self.rows_dropped_duplicate,
            "series_start": self.series_start.isoformat() if self.series_start else None,
            "series_end": self.series_end.isoformat() if self.series_end else None,
        }


def parse_flow_csv(path, value_column: str) -> tuple[list[FlowRecord], IngestReport]:
    """Parse a flow CSV. Rows whose value column fails numeric coercion are
    retained but marked missing; clean() drops them later."""
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeader(f"{path}: no header row")
        header = [h.strip() for h in header]
        if "Flow ID" not in header or "Timestamp" not in header:
            raise MalformedHeader(f"{path}: header lacks Flow ID/Timestamp columns")
        if value_column not in header:
            raise MissingColumn(f"{value_column!r} not in header")
        col = {name: header.index(name) for name in header}

        def cell(row, name, default=None):
            i = col.get(name)
            if i is None or i >= len(row):
                return default
            return row[i]

        records: list[FlowRecord] = []
        report = IngestReport()
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            report.rows_read += 1
            records.append(FlowRecord(
                flow_id=cell(row, "Flow ID", "").strip(),
                timestamp=parse_timestamp(cell(row, "Timestamp", "")),
                fwd_pkt_len_mean=_coerce_float(cell(row, "Fwd Pkt Len Mean")),
                fwd_seg_size_avg=_coerce_float(cell(row, "Fwd Seg Size Avg")),
                init_fwd_win_byts=_coerce_int(cell(row, "Init Fwd Win Byts"), WIN_BYTES_SENTINEL),
                init_bwd_win_byts=_coerce_int(cell(row, "Init Bwd Win Byts"), WIN_BYTES_SENTINEL),
                fwd_seg_size_min=_coerce_int(cell(row, "Fwd Seg Size Min"), 0),
                value=_coerce_float(cell(row, value_column)),
            ))
    if records:
        stamps = [r.timestamp for r in records]
        report.series_start = min(stamps)
        report.series_end = max(stamps)
    return records, report


def clean(records: list[FlowRecord]) -> tuple[list[FlowRecord], int, int]:
    """Drop value-missing rows, de-duplicate, sort by timestamp.

    A duplicate is an identical (flow_id, timestamp, value) triple, so
    repeated measurements at distinct flows survive.
    Returns (clean records, dropped_missing, dropped_duplicate).
    """
    dropped_missing = 0
    dropped_duplicate = 0
    seen: set[tuple] = set()
    kept: list[FlowRecord] = []
    for rec in records:
        if not rec.is_clean:
            dropped_missing += 1
            continue
        key = (rec.flow_id, rec.timestamp, rec.value)
        if key in seen:
            dropped_duplicate += 1
            continue
        seen.add(key)
        kept.append(rec)
    kept.sort(key=lambda r: r.timestamp)
    return kept, dropped_missing, dropped_duplicate


def to_series(records: list[FlowRecord], interval_seconds: float,
              aggregator: str = "mean") -> TimeSeries:
    """Roll clean records up into one bucket per interval; empty buckets are missing."""
    if aggregator not in ("mean", "sum", "count"):
        raise ValueError(f"unknown aggregator {aggregator!r}")
    if interval_seconds <= 0:
        raise ValueError("interval must be positive")
    usable = [r for r in records if r.is_clean]
    if not usable:
        raise EmptyInput("no clean records to bucket")
    usable.sort(key=lambda r: r.timestamp)
    first = usable[0].timestamp
    last = usable[-1].timestamp
    n_buckets = int((last - first).total_seconds() // interval_seconds) + 1
    buckets: list[list[float]] = [[] for _ in range(n_buckets)]
    for rec in usable:
        idx = int((rec.timestamp - first).total_seconds() // interval_seconds)
        buckets[idx].append(rec.value)
    values = np.full(n_buckets, np.nan)
    missing = np.ones(n_buckets, dtype=bool)
    for i, bucket in enumerate(buckets):
        if not bucket:
            continue
        missing[i] = False
        if aggregator == "mean":
            values[i] = sum(bucket) / len(bucket)
        elif aggregator == "sum":
            values[i] = sum(bucket)
        else:
            values[i] = len(bucket)
    return TimeSeries(start=first, interval_seconds=interval_seconds,
                      values=values, missing=missing)


def write_flow_csv(records: list[FlowRecord], path) -> None:
    """Write records back in the ingestion schema (round-trips with parse)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FLOW_COLUMNS)
        for rec in records:
            writer.writerow([
                rec.flow_id,
                format_timestamp(rec.timestamp),
                "" if rec.fwd_pkt_len_mean is None else f"{rec.fwd_pkt_len_mean:.6f}",
                "" if rec.fwd_seg_size_avg is None else f"{rec.fwd_seg_size_avg:.6f}",
                rec.init_fwd_win_byts,
                rec.init_bwd_win_byts,
                rec.fwd_seg_size_min,
            ])
