"""Retry execution with geometric backoff.

Delay and budget come from RetryPolicy; sleeps go through an injectable
callable so tests never wait on the wall clock. The request body must be
buffered before the first attempt so replays are safe.
"""

from __future__ import annotations

import time
from typing import Callable

from ..httpkit import Headers, HttpRequest, HttpResponse, TransportError, Upstream
from .policies import RetryPolicy


def retry_delay(policy: RetryPolicy, attempt_index: int) -> float | None:
    """Backoff in ms after the given 0-based failed attempt, or None when spent."""
    if attempt_index >= policy.max_retries:
        return None
    return policy.backoff_base_ms * (policy.backoff_multiplier ** attempt_index)


def execute_with_retry(request: HttpRequest, policy: RetryPolicy, upstream: Upstream,
                       sleep: Callable[[float], None] = time.sleep,
                       ) -> tuple[HttpResponse, int]:
    """Run the request against the upstream, retrying per policy.

    Returns the last response plus the number of upstream attempts made.
    A transport error on the final attempt is surfaced as a synthesized 502.
    """
    request.read_body()
    attempts = 0
    while True:
        failed_attempts = attempts
        attempts += 1
        try:
            response = upstream(request)
        except TransportError as exc:
            delay = retry_delay(policy, failed_attempts) if policy.retry_on_transport_error else None
            if delay is None:
                body = f"upstream transport error: {exc}".encode("utf-8")
                return HttpResponse(502, Headers({"content-type": "text/plain"}), body), attempts
            sleep(delay / 1000.0)
            continue
        if response.status in policy.retryable_statuses:
            delay = retry_delay(policy, failed_attempts)
            if delay is not None:
                sleep(delay / 1000.0)
                continue
        return response, attempts
