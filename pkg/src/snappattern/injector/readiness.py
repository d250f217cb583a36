"""Post-apply readiness polling through the cluster executor contract."""

from __future__ import annotations

import time
from typing import Callable

from .model import InjectionPlan, ReadinessReport, ResourceStatus


def check_readiness(executor, plan: InjectionPlan, timeout_ms: int,
                    poll_interval_ms: int = 500,
                    clock: Callable[[], float] = time.monotonic,
                    sleep: Callable[[float], None] = time.sleep) -> ReadinessReport:
    """Poll created resources until all are ready, one fails, or timeout.

    The executor answers per-resource status ("ready" | "pending" |
    "failed"); this function never inspects manifests itself.
    """
    refs = [c.ref for c in plan.creations]
    started = clock()
    while True:
        statuses = [ResourceStatus(ref, executor.resource_status(ref)) for ref in refs]
        elapsed_ms = (clock() - started) * 1000.0
        if any(s.status == "failed" for s in statuses):
            return ReadinessReport(resources=statuses, overall=False, elapsed_ms=elapsed_ms)
        if all(s.status == "ready" for s in statuses):
            return ReadinessReport(resources=statuses, overall=True, elapsed_ms=elapsed_ms)
        if elapsed_ms + poll_interval_ms > timeout_ms:
            return ReadinessReport(resources=statuses, overall=False, elapsed_ms=elapsed_ms)
        sleep(poll_interval_ms / 1000.0)
