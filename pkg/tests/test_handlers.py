from __future__ import annotations

import threading

import pytest

from conftest import CountingUpstream, FakeClock, make_request
from snappattern.httpkit import Headers, HttpResponse
from snappattern.proxy.breaker import Open
from snappattern.proxy.handlers import (
    CircuitBreakerHandler,
    GatewayOffloadHandler,
    build_handler,
)
from snappattern.proxy.policies import (
    AsyncReplyPolicy,
    CacheAsidePolicy,
    CircuitBreakerPolicy,
    CollapsePolicy,
    GatewayOffloadPolicy,
    RetryPolicy,
)


def no_sleep(_s: float) -> None:
    pass


class TestCircuitBreakerHandler:
    def make(self, clock, threshold=2, open_ms=10_000, max_retries=0):
        upstream = CountingUpstream(script=[500])
        policy = CircuitBreakerPolicy(
            failure_threshold=threshold,
            open_duration_ms=open_ms,
            retry=RetryPolicy(max_retries=max_retries),
        )
        return CircuitBreakerHandler(policy, upstream, clock=clock, sleep=no_sleep), upstream

    def test_opens_after_threshold_and_rejects_with_marker(self, fake_clock):
        handler, upstream = self.make(fake_clock)
        assert handler(make_request()).status == 500
        assert handler(make_request()).status == 500
        rejected = handler(make_request())
        assert rejected.status == 503
        assert rejected.headers["x-pattern"] == "circuit-open"
        assert upstream.calls == 2

    def test_breaker_silence_while_open(self, fake_clock):
        handler, upstream = self.make(fake_clock, open_ms=10_000)
        handler(make_request())
        handler(make_request())
        assert isinstance(handler.breaker.state, Open)
        calls_at_open = upstream.calls
        for ms in range(0, 10_000, 500):
            fake_clock.set(ms / 1000.0)
            handler(make_request())
        assert upstream.calls == calls_at_open

    def test_probe_after_open_duration_recovers(self, fake_clock):
        upstream = CountingUpstream(script=[500, 500, 200])
        policy = CircuitBreakerPolicy(failure_threshold=2, open_duration_ms=1_000,
                                      retry=RetryPolicy(max_retries=0))
        handler = CircuitBreakerHandler(policy, upstream, clock=fake_clock, sleep=no_sleep)
        handler(make_request())
        handler(make_request())  # opens
        fake_clock.advance(1.0)
        probe = handler(make_request())
        assert probe.status == 200
        assert handler(make_request()).status == 200  # closed again

    def test_final_outcome_counted_once_despite_retries(self, fake_clock):
        upstream = CountingUpstream(script=[503, 503, 503])
        policy = CircuitBreakerPolicy(
            failure_threshold=2,
            retry=RetryPolicy(max_retries=2, retryable_statuses=frozenset({503})),
        )
        handler = CircuitBreakerHandler(policy, upstream, clock=fake_clock, sleep=no_sleep)
        handler(make_request())  # one FINAL failure (3 attempts)
        assert upstream.calls == 3
        from snappattern.proxy.breaker import Closed

        assert handler.breaker.state == Closed(1)


class TestGatewayOffloadHandler:
    def test_rate_limit_rejection_carries_retry_after(self, fake_clock):
        upstream = CountingUpstream()
        policy = GatewayOffloadPolicy(rate_per_second=1.0, burst=1)
        handler = GatewayOffloadHandler(policy, upstream, clock=fake_clock)
        assert handler(make_request()).status == 200
        rejected = handler(make_request())
        assert rejected.status == 429
        assert int(rejected.headers["retry-after"]) >= 1
        assert upstream.calls == 1

    def test_client_keying_by_header(self, fake_clock):
        upstream = CountingUpstream()
        policy = GatewayOffloadPolicy(rate_per_second=0.001, burst=1,
                                      client_key="header:x-api-key")
        handler = GatewayOffloadHandler(policy, upstream, clock=fake_clock)
        assert handler(make_request(headers={"x-api-key": "alice"})).status == 200
        assert handler(make_request(headers={"x-api-key": "bob"})).status == 200
        assert handler(make_request(headers={"x-api-key": "alice"})).status == 429

    def test_body_limit_rejection(self, fake_clock):
        upstream = CountingUpstream()
        policy = GatewayOffloadPolicy(max_body_bytes=1024)
        handler = GatewayOffloadHandler(policy, upstream, clock=fake_clock)
        response = handler(make_request(method="POST", body=b"x" * 1025))
        assert response.status == 413
        assert upstream.calls == 0


PASSTHROUGH_CASES = [
    ("circuit_breaker_closed_success",
     lambda up: build_handler(CircuitBreakerPolicy(), up, "svc", sleep=no_sleep),
     make_request(path="/data", query="a=1")),
    ("collapse_non_get",
     lambda up: build_handler(CollapsePolicy(), up, "svc"),
     make_request(method="POST", path="/data", body=b"body")),
    ("gateway_under_limit",
     lambda up: build_handler(GatewayOffloadPolicy(), up, "svc"),
     make_request(method="POST", path="/data", body=b"small")),
    ("arr_non_wrapped_path",
     lambda up: build_handler(AsyncReplyPolicy(wrapped_path_prefixes=("/wrapped",)),
                              up, "svc"),
     make_request(path="/plain")),
]


@pytest.mark.parametrize("name,factory,request_obj",
                         PASSTHROUGH_CASES, ids=[c[0] for c in PASSTHROUGH_CASES])
def test_passthrough_transparency(name, factory, request_obj):
    """When the pattern takes no action, status and body match a direct call."""
    body = b'{"records": [1, 2, 3]}'
    direct_upstream = CountingUpstream(script=[200], body=body)
    direct = direct_upstream(request_obj)

    proxied_upstream = CountingUpstream(script=[200], body=body)
    handler = factory(proxied_upstream)
    try:
        proxied = handler(request_obj)
    finally:
        handler.close()

    assert proxied.status == direct.status
    assert proxied.body == direct.body


def test_cache_first_miss_transparent():
    body = b"fresh payload"
    upstream = CountingUpstream(body=body)
    handler = build_handler(CacheAsidePolicy(), upstream, "svc")
    response = handler(make_request(path="/data"))
    assert response.status == 200
    assert response.body == body


def test_concurrent_stress_keeps_shared_state_consistent():
    """Hammer one breaker handler from many threads; the invariant that
    upstream attempts stop once the breaker opens must hold throughout."""
    clock = FakeClock()
    upstream = CountingUpstream(script=[500])
    policy = CircuitBreakerPolicy(failure_threshold=5, open_duration_ms=60_000,
                                  retry=RetryPolicy(max_retries=0))
    handler = CircuitBreakerHandler(policy, upstream, clock=clock, sleep=no_sleep)

    barrier = threading.Barrier(16)
    results: list[int] = []
    lock = threading.Lock()

    def worker():
        barrier.wait()
        for _ in range(50):
            status = handler(make_request()).status
            with lock:
                results.append(status)

    threads = [threading.Thread(target=worker) for _ in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    # Every upstream call happened while the breaker still admitted traffic;
    # the count can never exceed threshold plus the requests already in
    # flight when the state flipped (bounded by thread count).
    assert upstream.calls <= policy.failure_threshold + 16
    assert results.count(503) == len(results) - upstream.calls
