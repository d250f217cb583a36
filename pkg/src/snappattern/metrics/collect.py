"""Run-level metric assembly: energy per namespace, latency for the pipeline."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .promclient import (
    PromQueryTemplate,
    QueryError,
    ResponseParseError,
    query_range,
    to_energy_samples,
)
from .windows import DEFAULT_WINDOW_SECONDS, sum_by_namespace_window, window_energy

logger = logging.getLogger(__name__)

# Metric names vary across Kepler / collector versions; these defaults are
# overridable per deployment.
DEFAULT_TEMPLATES = {
    "energy": PromQueryTemplate(
        "energy",
        'sum by (pod, container_namespace) '
        '(kepler_container_joules_total{container_namespace="{namespace}"})'),
    "latency_p95_ms": PromQueryTemplate(
        "latency_p95_ms",
        'histogram_quantile(0.95, sum by (le) '
        '(rate(duration_milliseconds_bucket{service_namespace="{namespace}"}[{range}])))'),
    "request_count": PromQueryTemplate(
        "request_count",
        'sum(increase(calls_total{service_namespace="{namespace}"}[{range}]))'),
}


@dataclass(frozen=True)
class RunMeta:
    run_id: str
    pattern: str  # pattern name or "baseline"
    workload: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class RowKey:
    run_id: str
    pattern: str
    workload: str
    namespace: str
    window_start_s: float


@dataclass
class MetricsRow:
    key: RowKey
    window_seconds: int
    joules: float | None = None
    request_count: int | None = None
    p95_latency_ms: float | None = None


@dataclass
class MetricsTable:
    rows: dict = field(default_factory=dict)  # RowKey -> MetricsRow
    missing_columns: set = field(default_factory=set)
    warnings: list = field(default_factory=list)

    def sorted_rows(self) -> list[MetricsRow]:
        return [self.rows[k] for k in sorted(
            self.rows, key=lambda k: (k.namespace, k.window_start_s))]


def _window_for(ts: float, grid_start: float, window_seconds: int) -> float:
    """End-anchored window assignment: a point evaluated exactly on a grid
    boundary describes the lookback window that ends there."""
    offset = ts - grid_start
    steps = offset / window_seconds
    if abs(steps - round(steps)) < 1e-9:
        return ts - window_seconds
    return grid_start + int(offset // window_seconds) * window_seconds


def collect_run(meta: RunMeta, endpoint_url: str, namespaces: list[str],
                latency_namespace: str | None = None,
                window_seconds: int = DEFAULT_WINDOW_SECONDS,
                templates: dict | None = None,
                query_fn=query_range) -> MetricsTable:
    """Assemble the metrics table for one closed run time range.

    Energy is collected per namespace; latency and request counts only for
    the pipeline-facing namespace. A failing query flags its column as
    missing instead of zero-filling.
    """
    templates = {**DEFAULT_TEMPLATES, **(templates or {})}
    latency_namespace = latency_namespace or (namespaces[0] if namespaces else "")
    table = MetricsTable()

    def row_for(namespace: str, window_start: float) -> MetricsRow:
        key = RowKey(meta.run_id, meta.pattern, meta.workload, namespace, window_start)
        if key not in table.rows:
            table.rows[key] = MetricsRow(key=key, window_seconds=window_seconds)
        return table.rows[key]

    grid_starts: dict = {}
    for namespace in namespaces:
        query = templates["energy"].render(namespace, window_seconds)
        try:
            series = query_fn(endpoint_url, query, meta.start_s, meta.end_s, window_seconds)
        except (QueryError, ResponseParseError) as exc:
            table.missing_columns.add("joules")
            table.warnings.append(f"energy query failed for {namespace}: {exc}")
            continue
        samples = to_energy_samples(series, fallback_namespace=namespace)
        by_pod: dict = {}
        for sample in samples:
            by_pod.setdefault((sample.namespace, sample.pod), []).append(sample)
        windows = []
        for pod_samples in by_pod.values():
            windows.extend(window_energy(pod_samples, window_seconds))
        if windows:
            grid_starts[namespace] = min(w.window_start_s for w in windows)
        for (ns, window_start), joules in sorted(sum_by_namespace_window(windows).items()):
            row_for(ns, window_start).joules = joules

    for column in ("latency_p95_ms", "request_count"):
        query = templates[column].render(latency_namespace, window_seconds)
        try:
            series = query_fn(endpoint_url, query, meta.start_s, meta.end_s, window_seconds)
        except (QueryError, ResponseParseError) as exc:
            table.missing_columns.add("p95_latency_ms" if column == "latency_p95_ms"
                                      else column)
            table.warnings.append(f"{column} query failed: {exc}")
            continue
        grid_start = grid_starts.get(latency_namespace)
        for s in series:
            for point in s.points:
                if grid_start is not None:
                    window_start = _window_for(point.timestamp_s, grid_start,
                                               window_seconds)
                    key = RowKey(meta.run_id, meta.pattern, meta.workload,
                                 latency_namespace, window_start)
                    row = table.rows.get(key)
                    if row is None:  # outside the energy grid
                        continue
                else:
                    row = row_for(latency_namespace,
                                  point.timestamp_s - window_seconds)
                if column == "latency_p95_ms":
                    row.p95_latency_ms = point.value
                else:
                    row.request_count = int(round(point.value))
    return table
