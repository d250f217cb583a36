"""Closed-loop load runner maintaining the profile's ramp of virtual users."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Callable

from ..httpkit import Headers, HttpRequest, TransportError, UpstreamClient
from .profiles import WorkloadProfile, concurrency_at

logger = logging.getLogger(__name__)

TRANSPORT_ERROR_MARKER = "error"

# How often the ramp controller reconciles the user pool.
_CONTROL_TICK_S = 0.1


@dataclass(frozen=True)
class RequestOutcome:
    started_at_unix_ms: int
    target: str
    status: int | str  # HTTP status, or the transport-error marker
    latency_ms: float
    bytes_received: int


class _VirtualUser(threading.Thread):
    def __init__(self, run: "LoadRun", target: str):
        super().__init__(daemon=True)
        self._run = run
        self._target = target
        self._client = UpstreamClient(target, connect_timeout_ms=2000,
                                      request_timeout_ms=15000)

    def run(self) -> None:
        template = self._run.profile.request
        while not self._run.stopping.is_set():
            request = HttpRequest(
                method=template.method,
                path=template.path,
                headers=Headers(template.headers),
                body=template.body,
            )
            started_ms = int(time.time() * 1000)
            began = time.monotonic()
            try:
                response = self._client(request)
                outcome = RequestOutcome(
                    started_at_unix_ms=started_ms,
                    target=self._target,
                    status=response.status,
                    latency_ms=(time.monotonic() - began) * 1000.0,
                    bytes_received=len(response.body),
                )
            except TransportError:
                outcome = RequestOutcome(
                    started_at_unix_ms=started_ms,
                    target=self._target,
                    status=TRANSPORT_ERROR_MARKER,
                    latency_ms=(time.monotonic() - began) * 1000.0,
                    bytes_received=0,
                )
            self._run.record(outcome)


class LoadRun:
    """Handle over a running workload: gauge, wait, abort."""

    def __init__(self, profile: WorkloadProfile,
                 outcome_sink: Callable[[RequestOutcome], None] | None = None):
        if not profile.targets:
            raise ValueError("profile needs at least one target URL")
        self.profile = profile
        self.stopping = threading.Event()
        self.outcomes: list[RequestOutcome] = []
        self._sink = outcome_sink
        self._sink_failed = False
        self._lock = threading.Lock()
        self._users: list[_VirtualUser] = []
        self._controller = threading.Thread(target=self._control, daemon=True)
        self.started_at: float | None = None
        self.ended_at: float | None = None

    def start(self) -> "LoadRun":
        self.started_at = time.time()
        self._controller.start()
        return self

    def record(self, outcome: RequestOutcome) -> None:
        with self._lock:
            self.outcomes.append(outcome)
        if self._sink is not None and not self._sink_failed:
            try:
                self._sink(outcome)
            except Exception:
                logger.exception("outcome sink failed; aborting run")
                self._sink_failed = True
                self.stopping.set()

    def active_users(self) -> int:
        return sum(1 for u in self._users if u.is_alive())

    def _control(self) -> None:
        began = time.monotonic()
        while not self.stopping.is_set():
            elapsed = time.monotonic() - began
            wanted = concurrency_at(self.profile, elapsed)
            if elapsed >= self.profile.duration_s:
                break
            while len(self._users) < wanted:
                target = self.profile.targets[len(self._users) % len(self.profile.targets)]
                user = _VirtualUser(self, target)
                self._users.append(user)
                user.start()
            self.stopping.wait(_CONTROL_TICK_S)
        self.stopping.set()
        for user in self._users:
            user.join(timeout=20)
        self.ended_at = time.time()

    def wait(self) -> list[RequestOutcome]:
        self._controller.join()
        with self._lock:
            return list(self.outcomes)

    def abort(self) -> None:
        self.stopping.set()


def run_load(profile: WorkloadProfile,
             outcome_sink: Callable[[RequestOutcome], None] | None = None) -> LoadRun:
    """Start the ramped closed-loop run and return its handle."""
    return LoadRun(profile, outcome_sink).start()
