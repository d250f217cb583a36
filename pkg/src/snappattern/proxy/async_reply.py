"""Asynchronous request-reply: enqueue, 202 + poll location, worker execution.

Requests matching a wrapped path prefix are acknowledged immediately with a
job id; a worker pool executes them against the upstream later and records
the result for polling. Submission latency is therefore independent of
upstream latency. Job ids are injectable so tests can pin them.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable

from ..httpkit import Headers, HttpRequest, HttpResponse, TransportError, Upstream
from .policies import AsyncReplyPolicy


@dataclass
class JobResult:
    status: int
    headers: Headers
    body: bytes


@dataclass
class JobRecord:
    job_id: str
    status: str  # pending | running | done | failed
    submitted_at: float
    completed_at: float | None = None
    result: JobResult | None = None
    error: str | None = None


def default_id_generator() -> str:
    return uuid.uuid4().hex


class JobStore:
    """Thread-safe job registry with TTL-based expiry on read."""

    def __init__(self, ttl_seconds: int, clock: Callable[[], float] = time.monotonic):
        self._ttl = ttl_seconds
        self._clock = clock
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}

    def create(self, job_id: str) -> JobRecord:
        record = JobRecord(job_id=job_id, status="pending", submitted_at=self._clock())
        with self._lock:
            self._jobs[job_id] = record
        return record

    def get(self, job_id: str) -> JobRecord | None:
        now = self._clock()
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                return None
            if now - record.submitted_at > self._ttl:
                del self._jobs[job_id]
                return None
            return record

    def mark_running(self, job_id: str) -> None:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is not None and record.status == "pending":
                record.status = "running"

    def complete(self, job_id: str, result: JobResult | None, error: str | None) -> None:
        with self._lock:
            record = self._jobs.get(job_id)
            if record is None:
                return
            record.completed_at = self._clock()
            if error is None:
                record.status = "done"
                record.result = result
            else:
                record.status = "failed"
                record.error = error


@dataclass
class _QueuedJob:
    job_id: str
    request: HttpRequest


class AsyncReplyExecutor:
    """Bounded job queue plus a worker pool draining it against the upstream."""

    def __init__(self, policy: AsyncReplyPolicy, upstream: Upstream,
                 clock: Callable[[], float] = time.monotonic,
                 id_generator: Callable[[], str] = default_id_generator):
        self.policy = policy
        self.store = JobStore(policy.job_ttl_seconds, clock=clock)
        self._upstream = upstream
        self._id_generator = id_generator
        self._queue: queue.Queue[_QueuedJob | None] = queue.Queue(maxsize=policy.queue_max_depth)
        self._workers = [
            threading.Thread(target=self._work, name=f"arr-worker-{i}", daemon=True)
            for i in range(policy.worker_concurrency)
        ]
        for worker in self._workers:
            worker.start()

    def _work(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            self.store.mark_running(item.job_id)
            try:
                response = self._upstream(item.request)
            except TransportError as exc:
                self.store.complete(item.job_id, None, str(exc))
            except Exception as exc:  # worker threads must never die silently
                self.store.complete(item.job_id, None, f"internal error: {exc}")
            else:
                self.store.complete(item.job_id, JobResult(
                    status=response.status,
                    headers=response.headers.copy(),
                    body=response.body,
                ), None)

    def submit(self, request: HttpRequest) -> HttpResponse:
        request.read_body()
        job_id = self._id_generator()
        try:
            self._queue.put_nowait(_QueuedJob(job_id=job_id, request=request))
        except queue.Full:
            return HttpResponse(503, Headers({"content-type": "application/json"}),
                                json.dumps({"error": "job queue full"}).encode())
        self.store.create(job_id)
        location = f"{self.policy.poll_path_prefix}/{job_id}"
        body = json.dumps({"job_id": job_id, "status": "pending"}).encode()
        return HttpResponse(202, Headers({
            "content-type": "application/json",
            "location": location,
        }), body)

    def poll(self, job_id: str) -> HttpResponse:
        record = self.store.get(job_id)
        if record is None:
            return HttpResponse(404, Headers({"content-type": "application/json"}),
                                json.dumps({"error": "unknown or expired job"}).encode())
        if record.status in ("pending", "running"):
            body = json.dumps({"job_id": job_id, "status": record.status}).encode()
            return HttpResponse(202, Headers({"content-type": "application/json"}), body)
        if record.status == "failed":
            body = json.dumps({"job_id": job_id, "status": "failed",
                               "error": record.error}).encode()
            return HttpResponse(502, Headers({"content-type": "application/json"}), body)
        result = record.result
        assert result is not None  # status=done implies a stored result
        headers = result.headers.copy()
        headers["x-upstream-status"] = str(result.status)
        return HttpResponse(200, headers, result.body)

    def close(self) -> None:
        for _ in self._workers:
            self._queue.put(None)
        for worker in self._workers:
            worker.join(timeout=5)
