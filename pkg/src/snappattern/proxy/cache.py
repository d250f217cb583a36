"""Cache-aside for upstream GET responses: TTL freshness plus LRU capacity.

Only 200 responses within the size bound are stored, and only an
allowlisted header subset (content-type plus the policy's vary headers) is
replayed, so hop-by-hop headers never leak out of the cache.
"""

from __future__ import annotations

import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable
from urllib.parse import parse_qsl

from ..httpkit import Headers, HttpRequest, HttpResponse, Upstream
from .policies import CacheAsidePolicy, CollapsePolicy


@dataclass
class CacheEntry:
    key: str
    status: int
    headers: Headers
    body: bytes
    stored_at: float
    ttl_seconds: int

    def fresh(self, now: float) -> bool:
        return now - self.stored_at < self.ttl_seconds


def cache_key(request: HttpRequest, policy: CacheAsidePolicy | CollapsePolicy,
              upstream_host: str) -> str | None:
    """Deterministic cache key, or None when the method bypasses caching.

    Layout: method | upstream host | path | query pairs sorted by name then
    value | vary header values in declared order.
    """
    methods = getattr(policy, "cacheable_methods", frozenset({"GET"}))
    if request.method.upper() not in methods:
        return None
    pairs = sorted(parse_qsl(request.query, keep_blank_values=True))
    query = "&".join(f"{k}={v}" for k, v in pairs)
    vary = ",".join(request.headers.get(h, "") for h in policy.vary_headers)
    return f"{request.method.upper()}|{upstream_host}|{request.path}|{query}|{vary}"


class LruTtlStore:
    """Bounded entry store: LRU eviction on capacity, strict TTL on reads."""

    def __init__(self, max_entries: int):
        self.max_entries = max_entries
        self._lock = threading.Lock()
        self._entries: OrderedDict[str, CacheEntry] = OrderedDict()

    def get(self, key: str, now: float) -> CacheEntry | None:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            if not entry.fresh(now):
                del self._entries[key]
                return None
            self._entries.move_to_end(key)
            return entry

    def put(self, entry: CacheEntry) -> None:
        with self._lock:
            self._entries[entry.key] = entry
            self._entries.move_to_end(entry.key)
            while len(self._entries) > self.max_entries:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def keys(self) -> list[str]:
        with self._lock:
            return list(self._entries)


def _replay_headers(entry: CacheEntry) -> Headers:
    headers = entry.headers.copy()
    headers["x-cache"] = "HIT"
    return headers


def cache_get_or_fetch(request: HttpRequest, policy: CacheAsidePolicy,
                       store: LruTtlStore, upstream: Upstream, upstream_host: str,
                       clock: Callable[[], float] = time.monotonic) -> HttpResponse:
    """Serve from cache when fresh, otherwise fetch once and maybe store."""
    key = cache_key(request, policy, upstream_host)
    if key is None:
        return upstream(request)

    now = clock()
    entry = store.get(key, now)
    if entry is not None:
        return HttpResponse(entry.status, _replay_headers(entry), entry.body)

    response = upstream(request)
    if response.status == 200 and len(response.body) <= policy.max_cacheable_body_bytes:
        kept = Headers()
        for name in ("content-type", *policy.vary_headers):
            value = response.headers.get(name)
            if value is not None:
                kept[name] = value
        store.put(CacheEntry(
            key=key,
            status=response.status,
            headers=kept,
            body=response.body,
            stored_at=now,
            ttl_seconds=policy.ttl_seconds,
        ))
    out = response.copy()
    out.headers["x-cache"] = "MISS"
    return out
