from __future__ import annotations

import io
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_request
from snappattern.httpkit import HttpRequest, Headers
from snappattern.proxy.policies import GatewayOffloadPolicy
from snappattern.proxy.ratelimit import (
    BucketTable,
    TokenBucket,
    enforce_body_limit,
    ratelimit_admit,
)


class TestTokenBucket:
    def test_burst_of_capacity_admits_then_rejects(self):
        bucket = TokenBucket.full(5, 10.0, now=0.0)
        outcomes = [ratelimit_admit(bucket, 0.0)[0] for _ in range(6)]
        assert outcomes == [True] * 5 + [False]

    def test_linear_refill(self):
        bucket = TokenBucket.full(10, 10.0, now=0.0)
        for _ in range(10):
            ratelimit_admit(bucket, 0.0)
        bucket.refill(0.5)
        assert bucket.tokens == 5.0

    def test_refill_never_exceeds_capacity(self):
        bucket = TokenBucket.full(5, 100.0, now=0.0)
        bucket.refill(60.0)
        assert bucket.tokens == 5.0

    def test_retry_after_matches_token_deficit(self):
        bucket = TokenBucket.full(1, 0.5, now=0.0)  # one token per 2 s
        assert ratelimit_admit(bucket, 0.0) == (True, None)
        admitted, retry_after = ratelimit_admit(bucket, 0.0)
        assert not admitted
        assert retry_after == 2

    def test_admissions_bounded_by_burst_plus_rate_window(self):
        rng = random.Random(7)
        rate, burst = 10.0, 5
        bucket = TokenBucket.full(burst, rate, now=0.0)
        now = 0.0
        admitted_times = []
        for _ in range(2000):
            now += rng.uniform(0.0, 0.05)
            if ratelimit_admit(bucket, now)[0]:
                admitted_times.append(now)
        # Over every prefix window [t0, t], admissions <= burst + rate * dt.
        t0 = 0.0
        for i, t in enumerate(admitted_times):
            count = i + 1
            assert count <= burst + rate * (t - t0) + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=0.2), min_size=1, max_size=300),
       st.integers(min_value=1, max_value=20),
       st.floats(min_value=0.5, max_value=50.0))
def test_admission_bound_property(gaps, burst, rate):
    bucket = TokenBucket.full(burst, rate, now=0.0)
    now = 0.0
    admitted = 0
    for gap in gaps:
        now += gap
        if ratelimit_admit(bucket, now)[0]:
            admitted += 1
        assert admitted <= burst + rate * now + 1e-9


class TestBucketTable:
    def test_separate_keys_get_separate_buckets(self, fake_clock):
        table = BucketTable(GatewayOffloadPolicy(rate_per_second=1, burst=1),
                            clock=fake_clock)
        assert table.admit("a")[0]
        assert table.admit("b")[0]
        assert not table.admit("a")[0]


def streaming_request(payload: bytes, declared: bool) -> HttpRequest:
    stream = io.BytesIO(payload)
    return HttpRequest(method="POST", path="/", headers=Headers(), body=b"",
                       stream=stream,
                       content_length=len(payload) if declared else None)


class TestBodyLimit:
    def test_declared_over_limit_rejected_without_reading(self):
        class ExplodingStream:
            def read(self, _n=-1):
                raise AssertionError("stream must not be read")

        request = HttpRequest(method="POST", path="/", headers=Headers(),
                              stream=ExplodingStream(), content_length=1025)
        response = enforce_body_limit(request, 1024)
        assert response is not None
        assert response.status == 413

    def test_body_exactly_at_limit_forwarded(self):
        request = streaming_request(b"x" * 1024, declared=True)
        assert enforce_body_limit(request, 1024) is None
        assert request.body == b"x" * 1024

    def test_undeclared_length_aborted_at_limit(self):
        reads = []

        class CountingStream:
            def __init__(self, payload):
                self._buf = io.BytesIO(payload)

            def read(self, n=-1):
                data = self._buf.read(n)
                reads.append(len(data))
                return data

        request = HttpRequest(method="POST", path="/", headers=Headers(),
                              stream=CountingStream(b"y" * 2048), content_length=None)
        response = enforce_body_limit(request, 1024)
        assert response is not None
        assert response.status == 413
        assert sum(reads) <= 1025

    def test_buffered_body_checked_too(self):
        request = make_request(method="POST", body=b"z" * 1025)
        response = enforce_body_limit(request, 1024)
        assert response is not None and response.status == 413
