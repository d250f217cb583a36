"""Request collapsing (single-flight) over an in-flight table.

The first arrival for a key becomes the leader and performs the only
upstream call; concurrent equal-key arrivals wait on the leader's completion
signal and receive copies of its response, success or failure alike. Nobody
holds a lock across the upstream call: the table lock guards registration
only, and followers block on a per-key event.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..httpkit import Headers, HttpRequest, HttpResponse, TransportError, Upstream
from .policies import CollapsePolicy


@dataclass
class _Flight:
    done: threading.Event = field(default_factory=threading.Event)
    response: HttpResponse | None = None
    error: Exception | None = None
    waiters: int = 0


class InflightTable:
    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._flights: dict[str, _Flight] = {}

    def lead_or_join(self, key: str, max_waiters: int) -> tuple[str, _Flight | None]:
        """Register interest in a key: 'leader', 'follower', or 'independent'."""
        with self._lock:
            flight = self._flights.get(key)
            if flight is None:
                flight = _Flight()
                self._flights[key] = flight
                return "leader", flight
            if flight.waiters >= max_waiters:
                return "independent", None
            flight.waiters += 1
            return "follower", flight

    def complete(self, key: str, flight: _Flight, response: HttpResponse | None,
                 error: Exception | None) -> None:
        with self._lock:
            self._flights.pop(key, None)
        flight.response = response
        flight.error = error
        flight.done.set()

    def inflight_count(self) -> int:
        with self._lock:
            return len(self._flights)


def _transport_error_response(error: Exception) -> HttpResponse:
    body = f"upstream transport error: {error}".encode("utf-8")
    return HttpResponse(502, Headers({"content-type": "text/plain"}), body)


def collapse_execute(key: str, request: HttpRequest, policy: CollapsePolicy,
                     table: InflightTable, upstream: Upstream) -> HttpResponse:
    """Execute one request under single-flight semantics for its key."""
    role, flight = table.lead_or_join(key, policy.max_waiters)

    if role == "leader":
        assert flight is not None
        try:
            response = upstream(request)
        except TransportError as exc:
            table.complete(key, flight, None, exc)
            return _transport_error_response(exc)
        table.complete(key, flight, response, None)
        return response.copy()

    if role == "follower":
        assert flight is not None
        if flight.done.wait(policy.wait_timeout_ms / 1000.0):
            if flight.error is not None:
                return _transport_error_response(flight.error)
            assert flight.response is not None
            return flight.response.copy()
        # Leader overran the wait budget; fall through to an independent call.

    try:
        return upstream(request)
    except TransportError as exc:
        return _transport_error_response(exc)
