"""Pattern handlers: one policy applied to traffic for a single upstream.

Each handler is a callable ``(HttpRequest) -> HttpResponse`` holding the
pattern's shared runtime state. Exactly one handler is active per proxy
instance. When the pattern takes no action the upstream's status and body
pass through byte-equal.
"""

from __future__ import annotations

import time
from typing import Callable
from urllib.parse import urlsplit

from ..httpkit import Headers, HttpRequest, HttpResponse, TransportError, Upstream
from .async_reply import AsyncReplyExecutor, default_id_generator
from .breaker import CircuitBreaker, Decision, Outcome
from .cache import LruTtlStore, cache_get_or_fetch, cache_key
from .collapse import InflightTable, collapse_execute
from .policies import (
    AsyncReplyPolicy,
    CacheAsidePolicy,
    CircuitBreakerPolicy,
    CollapsePolicy,
    GatewayOffloadPolicy,
    PatternPolicy,
    ProxyRuntimeConfig,
)
from .ratelimit import BucketTable, client_key_for, enforce_body_limit
from .retrying import execute_with_retry

Clock = Callable[[], float]


def _transport_error_response(exc: Exception) -> HttpResponse:
    body = f"upstream transport error: {exc}".encode()
    return HttpResponse(502, Headers({"content-type": "text/plain"}), body)


class CircuitBreakerHandler:
    def __init__(self, policy: CircuitBreakerPolicy, upstream: Upstream,
                 clock: Clock = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.policy = policy
        self.breaker = CircuitBreaker(policy, clock=clock)
        self._upstream = upstream
        self._sleep = sleep

    def __call__(self, request: HttpRequest) -> HttpResponse:
        decision = self.breaker.try_admit()
        if decision is Decision.REJECT:
            return HttpResponse(503, Headers({
                "content-type": "text/plain",
                "x-pattern": "circuit-open",
            }), b"circuit open")
        response, _ = execute_with_retry(request, self.policy.retry,
                                         self._upstream, sleep=self._sleep)
        failed = response.status in self.policy.failure_statuses
        self.breaker.record(Outcome.FAILURE if failed else Outcome.SUCCESS)
        return response

    def close(self) -> None:
        pass


class CacheAsideHandler:
    def __init__(self, policy: CacheAsidePolicy, upstream: Upstream,
                 upstream_host: str, clock: Clock = time.monotonic):
        self.policy = policy
        self.store = LruTtlStore(policy.max_entries)
        self._upstream = upstream
        self._upstream_host = upstream_host
        self._clock = clock

    def __call__(self, request: HttpRequest) -> HttpResponse:
        try:
            return cache_get_or_fetch(request, self.policy, self.store,
                                      self._upstream, self._upstream_host,
                                      clock=self._clock)
        except TransportError as exc:
            return _transport_error_response(exc)

    def close(self) -> None:
        pass


class CollapseHandler:
    def __init__(self, policy: CollapsePolicy, upstream: Upstream, upstream_host: str):
        self.policy = policy
        self.table = InflightTable()
        self._upstream = upstream
        self._upstream_host = upstream_host
        # Collapsing keys requests exactly like the cache does.
        self._key_policy = CacheAsidePolicy(vary_headers=policy.vary_headers)

    def __call__(self, request: HttpRequest) -> HttpResponse:
        request.read_body()
        key = cache_key(request, self._key_policy, self._upstream_host)
        if key is None:
            try:
                return self._upstream(request)
            except TransportError as exc:
                return _transport_error_response(exc)
        return collapse_execute(key, request, self.policy, self.table, self._upstream)

    def close(self) -> None:
        pass


class AsyncReplyHandler:
    def __init__(self, policy: AsyncReplyPolicy, upstream: Upstream,
                 clock: Clock = time.monotonic,
                 id_generator: Callable[[], str] = default_id_generator):
        self.policy = policy
        self.executor = AsyncReplyExecutor(policy, upstream, clock=clock,
                                           id_generator=id_generator)
        self._upstream = upstream

    def __call__(self, request: HttpRequest) -> HttpResponse:
        poll_prefix = self.policy.poll_path_prefix.rstrip("/")
        if request.method.upper() == "GET" and request.path.startswith(poll_prefix + "/"):
            job_id = request.path[len(poll_prefix) + 1:]
            return self.executor.poll(job_id)
        if any(request.path.startswith(p) for p in self.policy.wrapped_path_prefixes):
            return self.executor.submit(request)
        try:
            return self._upstream(request)
        except TransportError as exc:
            return _transport_error_response(exc)

    def close(self) -> None:
        self.executor.close()


class GatewayOffloadHandler:
    def __init__(self, policy: GatewayOffloadPolicy, upstream: Upstream,
                 clock: Clock = time.monotonic):
        self.policy = policy
        self.buckets = BucketTable(policy, clock=clock)
        self._upstream = upstream

    def __call__(self, request: HttpRequest) -> HttpResponse:
        admitted, retry_after = self.buckets.admit(client_key_for(request, self.policy))
        if not admitted:
            return HttpResponse(429, Headers({
                "content-type": "text/plain",
                "retry-after": str(retry_after),
                "x-pattern": "rate-limit",
            }), b"rate limit exceeded")
        rejection = enforce_body_limit(request, self.policy.max_body_bytes)
        if rejection is not None:
            return rejection
        try:
            return self._upstream(request)
        except TransportError as exc:
            return _transport_error_response(exc)

    def close(self) -> None:
        pass


PatternHandler = (
    CircuitBreakerHandler
    | CacheAsideHandler
    | CollapseHandler
    | AsyncReplyHandler
    | GatewayOffloadHandler
)


def build_handler(policy: PatternPolicy, upstream: Upstream, upstream_host: str,
                  clock: Clock = time.monotonic,
                  sleep: Callable[[float], None] = time.sleep,
                  id_generator: Callable[[], str] = default_id_generator) -> PatternHandler:
    """Instantiate the handler for the single active pattern."""
    if isinstance(policy, CircuitBreakerPolicy):
        return CircuitBreakerHandler(policy, upstream, clock=clock, sleep=sleep)
    if isinstance(policy, CacheAsidePolicy):
        return CacheAsideHandler(policy, upstream, upstream_host, clock=clock)
    if isinstance(policy, CollapsePolicy):
        return CollapseHandler(policy, upstream, upstream_host)
    if isinstance(policy, AsyncReplyPolicy):
        return AsyncReplyHandler(policy, upstream, clock=clock, id_generator=id_generator)
    if isinstance(policy, GatewayOffloadPolicy):
        return GatewayOffloadHandler(policy, upstream, clock=clock)
    raise TypeError(f"unsupported policy type: {type(policy).__name__}")


def build_from_config(config: ProxyRuntimeConfig, upstream: Upstream | None = None,
                      **kwargs) -> PatternHandler:
    from ..httpkit import UpstreamClient

    config.validate()
    if upstream is None:
        upstream = UpstreamClient(
            config.upstream_base,
            connect_timeout_ms=config.upstream_connect_timeout_ms,
            request_timeout_ms=config.upstream_request_timeout_ms,
        )
    host = urlsplit(config.upstream_base).hostname or config.upstream_base
    return build_handler(config.policy, upstream, host, **kwargs)
