"""Gateway offloading primitives: token-bucket rate limiting and body caps."""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass
from typing import Callable

from ..httpkit import BodyTooLarge, Headers, HttpRequest, HttpResponse
from .policies import GatewayOffloadPolicy


@dataclass
class TokenBucket:
    capacity: int
    tokens: float
    refill_rate_per_s: float
    last_refill: float

    @classmethod
    def full(cls, capacity: int, rate_per_s: float, now: float) -> "TokenBucket":
        return cls(capacity=capacity, tokens=float(capacity),
                   refill_rate_per_s=rate_per_s, last_refill=now)

    def refill(self, now: float) -> None:
        elapsed = max(0.0, now - self.last_refill)
        self.tokens = min(float(self.capacity), self.tokens + self.refill_rate_per_s * elapsed)
        self.last_refill = now


def ratelimit_admit(bucket: TokenBucket, now: float) -> tuple[bool, int | None]:
    """Refill, then take one token if available.

    Returns (admitted, retry_after_seconds). retry_after is the ceiling of
    the time until a full token accrues, only set on rejection.
    """
    bucket.refill(now)
    if bucket.tokens >= 1.0:
        bucket.tokens -= 1.0
        return True, None
    retry_after = math.ceil((1.0 - bucket.tokens) / bucket.refill_rate_per_s)
    return False, max(1, retry_after)


class BucketTable:
    """One token bucket per client key, created full on first sight."""

    def __init__(self, policy: GatewayOffloadPolicy,
                 clock: Callable[[], float] = time.monotonic):
        self._policy = policy
        self._clock = clock
        self._lock = threading.Lock()
        self._buckets: dict[str, TokenBucket] = {}

    def admit(self, client_key: str) -> tuple[bool, int | None]:
        now = self._clock()
        with self._lock:
            bucket = self._buckets.get(client_key)
            if bucket is None:
                bucket = TokenBucket.full(self._policy.burst,
                                          self._policy.rate_per_second, now)
                self._buckets[client_key] = bucket
            return ratelimit_admit(bucket, now)


def client_key_for(request: HttpRequest, policy: GatewayOffloadPolicy) -> str:
    if policy.client_key.startswith("header:"):
        name = policy.client_key.split(":", 1)[1]
        return request.headers.get(name, "") or request.client_address
    return request.client_address


def enforce_body_limit(request: HttpRequest, max_body_bytes: int) -> HttpResponse | None:
    """Return a 413 rejection, or None once the body is buffered within limit.

    A declared content-length over the limit rejects without reading. An
    undeclared length is counted while streaming and aborted at the limit,
    after at most limit + 1 bytes read.
    """
    if request.content_length is not None and request.content_length > max_body_bytes:
        return _too_large(max_body_bytes)
    try:
        request.read_body_capped(max_body_bytes)
    except BodyTooLarge:
        return _too_large(max_body_bytes)
    return None


def _too_large(limit: int) -> HttpResponse:
    body = f"request body exceeds {limit} bytes".encode()
    return HttpResponse(413, Headers({
        "content-type": "text/plain",
        "x-pattern": "body-limit",
    }), body)
