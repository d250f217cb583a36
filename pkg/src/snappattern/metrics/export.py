"""Delimited and plot-series exports of a metrics table."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .collect import MetricsTable

CSV_COLUMNS = ["run_id", "pattern", "workload", "namespace", "window_start_unix_s",
               "window_seconds", "joules", "request_count", "p95_latency_ms"]


def _number(value: float | int | None) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def csv_bytes(table: MetricsTable) -> bytes:
    """Render the table as RFC-4180 CSV, rows sorted by (namespace, window)."""
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer)
    writer.writerow(CSV_COLUMNS)
    for row in table.sorted_rows():
        key = row.key
        writer.writerow([
            key.run_id, key.pattern, key.workload, key.namespace,
            _number(key.window_start_s), str(row.window_seconds),
            _number(row.joules), _number(row.request_count),
            _number(row.p95_latency_ms),
        ])
    return buffer.getvalue().encode("utf-8")


def export_csv(table: MetricsTable, path: str | Path) -> Path:
    path = Path(path)
    path.write_bytes(csv_bytes(table))
    return path


def export_series(table: MetricsTable) -> list[dict]:
    """One series per (pattern, workload, namespace): x window start, y joules."""
    grouped: dict = {}
    for row in table.sorted_rows():
        if row.joules is None:
            continue
        key = (row.key.pattern, row.key.workload, row.key.namespace)
        grouped.setdefault(key, []).append([row.key.window_start_s, row.joules])
    series = []
    for (pattern, workload, namespace) in sorted(grouped):
        points = sorted(grouped[(pattern, workload, namespace)])
        series.append({
            "pattern": pattern,
            "workload": workload,
            "namespace": namespace,
            "points": points,
        })
    return series


def series_json_bytes(table: MetricsTable) -> bytes:
    return json.dumps(export_series(table), indent=2).encode("utf-8")


def write_series_json(table: MetricsTable, path: str | Path) -> Path:
    path = Path(path)
    path.write_bytes(series_json_bytes(table))
    return path
