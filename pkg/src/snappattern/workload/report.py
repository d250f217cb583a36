"""Outcome aggregation and the outcomes CSV format."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .profiles import WorkloadProfile
from .runner import TRANSPORT_ERROR_MARKER, RequestOutcome

OUTCOME_CSV_HEADER = ["started_at_unix_ms", "target", "status", "latency_ms", "bytes"]


@dataclass(frozen=True)
class StepAggregate:
    step_index: int
    total: int
    error_count: int
    p95_latency_ms: float


@dataclass
class WorkloadReport:
    total: int
    error_count: int
    throughput_rps: float
    p50_latency_ms: float
    p95_latency_ms: float
    p99_latency_ms: float
    per_step: list[StepAggregate] = field(default_factory=list)


def nearest_rank(sorted_latencies: list[float], percentile: float) -> float:
    """Nearest-rank percentile over an ascending list (empty -> 0)."""
    if not sorted_latencies:
        return 0.0
    rank = math.ceil(percentile / 100.0 * len(sorted_latencies))
    return sorted_latencies[max(rank, 1) - 1]


def _is_error(outcome: RequestOutcome) -> bool:
    if outcome.status == TRANSPORT_ERROR_MARKER:
        return True
    return isinstance(outcome.status, int) and outcome.status >= 400


def summarize(outcomes: list[RequestOutcome],
              profile: WorkloadProfile | None = None) -> WorkloadReport:
    if not outcomes:
        return WorkloadReport(total=0, error_count=0, throughput_rps=0.0,
                              p50_latency_ms=0.0, p95_latency_ms=0.0, p99_latency_ms=0.0)
    latencies = sorted(o.latency_ms for o in outcomes)
    total = len(outcomes)
    errors = sum(1 for o in outcomes if _is_error(o))

    if profile is not None and profile.duration_s > 0:
        duration_s = float(profile.duration_s)
    else:
        first = min(o.started_at_unix_ms for o in outcomes)
        last = max(o.started_at_unix_ms + o.latency_ms for o in outcomes)
        duration_s = max((last - first) / 1000.0, 1e-9)

    per_step: list[StepAggregate] = []
    if profile is not None:
        t0 = min(o.started_at_unix_ms for o in outcomes)
        buckets: dict[int, list[RequestOutcome]] = {}
        for o in outcomes:
            step = int((o.started_at_unix_ms - t0) / 1000.0 // profile.step_interval_s)
            buckets.setdefault(step, []).append(o)
        for step in sorted(buckets):
            members = buckets[step]
            per_step.append(StepAggregate(
                step_index=step,
                total=len(members),
                error_count=sum(1 for o in members if _is_error(o)),
                p95_latency_ms=nearest_rank(sorted(o.latency_ms for o in members), 95),
            ))

    return WorkloadReport(
        total=total,
        error_count=errors,
        throughput_rps=total / duration_s,
        p50_latency_ms=nearest_rank(latencies, 50),
        p95_latency_ms=nearest_rank(latencies, 95),
        p99_latency_ms=nearest_rank(latencies, 99),
        per_step=per_step,
    )


def write_outcomes_csv(outcomes: list[RequestOutcome], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(OUTCOME_CSV_HEADER)
        for o in outcomes:
            writer.writerow([o.started_at_unix_ms, o.target, o.status,
                             repr(o.latency_ms), o.bytes_received])


def read_outcomes_csv(path: str | Path) -> list[RequestOutcome]:
    out: list[RequestOutcome] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            status: int | str = row["status"]
            if status != TRANSPORT_ERROR_MARKER:
                status = int(status)
            out.append(RequestOutcome(
                started_at_unix_ms=int(row["started_at_unix_ms"]),
                target=row["target"],
                status=status,
                latency_ms=float(row["latency_ms"]),
                bytes_received=int(row["bytes"]),
            ))
    return out
