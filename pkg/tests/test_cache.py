from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CountingUpstream, FakeClock, make_request
from snappattern.httpkit import Headers, HttpResponse
from snappattern.proxy.cache import CacheEntry, LruTtlStore, cache_get_or_fetch, cache_key
from snappattern.proxy.policies import CacheAsidePolicy

HOST = "data-product"


class TestCacheKey:
    def test_query_pairs_sorted(self):
        req = make_request(path="/data", query="b=2&a=1")
        key = cache_key(req, CacheAsidePolicy(), HOST)
        assert key == "GET|data-product|/data|a=1&b=2|"

    def test_query_order_is_irrelevant(self):
        p = CacheAsidePolicy()
        k1 = cache_key(make_request(path="/data", query="b=2&a=1"), p, HOST)
        k2 = cache_key(make_request(path="/data", query="a=1&b=2"), p, HOST)
        assert k1 == k2

    def test_vary_header_distinguishes_keys(self):
        p = CacheAsidePolicy(vary_headers=("accept",))
        k_csv = cache_key(make_request(headers={"accept": "text/csv"}), p, HOST)
        k_json = cache_key(make_request(headers={"accept": "application/json"}), p, HOST)
        assert k_csv != k_json

    def test_non_cacheable_method_yields_bypass(self):
        assert cache_key(make_request(method="POST"), CacheAsidePolicy(), HOST) is None

    def test_duplicate_query_names_sorted_by_value(self):
        p = CacheAsidePolicy()
        k1 = cache_key(make_request(query="a=2&a=1"), p, HOST)
        k2 = cache_key(make_request(query="a=1&a=2"), p, HOST)
        assert k1 == k2


class TestGetOrFetch:
    def test_second_get_within_ttl_hits_cache(self, fake_clock):
        upstream = CountingUpstream(body=b"payload")
        policy = CacheAsidePolicy(ttl_seconds=30)
        store = LruTtlStore(policy.max_entries)
        first = cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        fake_clock.advance(29.999)
        second = cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        assert upstream.calls == 1
        assert first.headers["x-cache"] == "MISS"
        assert second.headers["x-cache"] == "HIT"
        assert second.body == b"payload"

    def test_expiry_boundary_is_exclusive_of_freshness(self, fake_clock):
        upstream = CountingUpstream()
        policy = CacheAsidePolicy(ttl_seconds=30)
        store = LruTtlStore(policy.max_entries)
        cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        fake_clock.advance(30.0)
        response = cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        assert upstream.calls == 2
        assert response.headers["x-cache"] == "MISS"

    def test_non_200_not_cached(self, fake_clock):
        upstream = CountingUpstream(script=[404, 200])
        policy = CacheAsidePolicy()
        store = LruTtlStore(policy.max_entries)
        first = cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        second = cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        assert first.status == 404
        assert second.status == 200
        assert upstream.calls == 2

    def test_oversized_body_not_cached(self, fake_clock):
        upstream = CountingUpstream(body=b"x" * 100)
        policy = CacheAsidePolicy(max_cacheable_body_bytes=99)
        store = LruTtlStore(policy.max_entries)
        cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        assert upstream.calls == 2

    def test_only_allowlisted_headers_replayed(self, fake_clock):
        def upstream(_request):
            return HttpResponse(200, Headers({
                "content-type": "application/json",
                "set-cookie": "secret=1",
                "connection": "keep-alive",
            }), b"{}")

        policy = CacheAsidePolicy()
        store = LruTtlStore(policy.max_entries)
        cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        hit = cache_get_or_fetch(make_request(), policy, store, upstream, HOST, fake_clock)
        assert hit.headers["content-type"] == "application/json"
        assert "set-cookie" not in hit.headers
        assert "connection" not in hit.headers

    def test_lru_eviction_order(self, fake_clock):
        policy = CacheAsidePolicy(max_entries=2)
        store = LruTtlStore(policy.max_entries)

        def fetch(path):
            upstream = CountingUpstream(body=path.encode())
            return cache_get_or_fetch(make_request(path=path), policy, store,
                                      upstream, HOST, fake_clock), upstream

        fetch("/a")
        fetch("/b")
        fetch("/a")  # hits, refreshing /a's recency
        fetch("/c")  # evicts /b, the least recently used
        _, upstream_a = fetch("/a")
        assert upstream_a.calls == 0  # /a survived
        _, upstream_b = fetch("/b")
        assert upstream_b.calls == 1  # /b was gone


@settings(max_examples=200, deadline=None)
@given(ops=st.lists(st.tuples(st.sampled_from("abcdef"), st.booleans()),
                    min_size=1, max_size=60),
       max_entries=st.integers(min_value=1, max_value=4))
def test_lru_matches_reference_list(ops, max_entries):
    """Store contents always equal a reference LRU list replayed in the test."""
    store = LruTtlStore(max_entries)
    reference: list[str] = []  # most recent last
    for key, is_read in ops:
        if is_read:
            entry = store.get(key, now=0.0)
            if key in reference:
                assert entry is not None
                reference.remove(key)
                reference.append(key)
            else:
                assert entry is None
        else:
            store.put(CacheEntry(key=key, status=200, headers=Headers(),
                                 body=b"", stored_at=0.0, ttl_seconds=60))
            if key in reference:
                reference.remove(key)
            reference.append(key)
            if len(reference) > max_entries:
                reference.pop(0)
        assert sorted(store.keys()) == sorted(reference)
