from __future__ import annotations

import threading

import pytest

from snappattern.httpkit import Headers, HttpRequest, HttpResponse, TransportError


class FakeClock:
    """Settable monotonic clock for timing-sensitive tests."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def __call__(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        self._now += seconds

    def set(self, value: float) -> None:
        self._now = value


class CountingUpstream:
    """Upstream fixture that counts invocations and can script responses.

    ``script`` is a list of status codes or "error" markers consumed one per
    call; once exhausted the last entry repeats. ``delay_s`` blocks inside
    the call to model a slow upstream.
    """

    def __init__(self, script=None, body: bytes = b"ok", delay_s: float = 0.0):
        self.script = list(script) if script else [200]
        self.body = body
        self.delay_s = delay_s
        self.calls = 0
        self.requests: list[HttpRequest] = []
        self._lock = threading.Lock()

    def __call__(self, request: HttpRequest) -> HttpResponse:
        with self._lock:
            index = min(self.calls, len(self.script) - 1)
            self.calls += 1
            self.requests.append(request)
            step = self.script[index]
        if self.delay_s:
            import time

            time.sleep(self.delay_s)
        if step == "error":
            raise TransportError("scripted transport failure")
        return HttpResponse(step, Headers({"content-type": "text/plain"}), self.body)


def make_request(method="GET", path="/", query="", headers=None, body=b"",
                 client="10.0.0.1") -> HttpRequest:
    return HttpRequest(method=method, path=path, query=query,
                       headers=Headers(headers or {}), body=body,
                       client_address=client)


@pytest.fixture
def fake_clock() -> FakeClock:
    return FakeClock()
