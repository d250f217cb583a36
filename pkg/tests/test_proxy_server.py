from __future__ import annotations

import http.client
import json

import pytest

from snappattern.httpkit import Headers, HttpRequest, ServerHandle, UpstreamClient, json_response
from snappattern.proxy.policies import (
    CacheAsidePolicy,
    GatewayOffloadPolicy,
    ProxyRuntimeConfig,
)
from snappattern.proxy.server import ProxyServer


@pytest.fixture
def upstream_server():
    hits = {"count": 0}

    def app(request: HttpRequest):
        hits["count"] += 1
        return json_response(200, {"path": request.path, "count": hits["count"],
                                   "body_len": len(request.read_body())})

    with ServerHandle(app) as server:
        yield server, hits


def test_cache_pattern_over_the_wire(upstream_server):
    server, hits = upstream_server
    config = ProxyRuntimeConfig(
        listen_address="127.0.0.1:0",
        upstream_base=server.url,
        policy=CacheAsidePolicy(ttl_seconds=60),
    )
    with ProxyServer(config) as proxy:
        client = UpstreamClient(proxy.url)
        first = client(HttpRequest(method="GET", path="/data", query="a=1"))
        second = client(HttpRequest(method="GET", path="/data", query="a=1"))

    assert first.status == 200
    assert first.headers["x-cache"] == "MISS"
    assert second.headers["x-cache"] == "HIT"
    assert second.body == first.body
    assert hits["count"] == 1


def test_gateway_body_limit_over_the_wire_with_chunked_body(upstream_server):
    server, hits = upstream_server
    config = ProxyRuntimeConfig(
        listen_address="127.0.0.1:0",
        upstream_base=server.url,
        policy=GatewayOffloadPolicy(max_body_bytes=1024, rate_per_second=1000,
                                    burst=1000),
    )
    with ProxyServer(config) as proxy:
        conn = http.client.HTTPConnection("127.0.0.1", proxy.port, timeout=5)
        # iterator body makes http.client emit chunked transfer-encoding
        conn.request("POST", "/upload", body=iter([b"x" * 512, b"y" * 1536]),
                     headers={"Content-Type": "application/octet-stream"})
        response = conn.getresponse()
        status = response.status
        response.read()
        conn.close()

    assert status == 413
    assert hits["count"] == 0


def test_gateway_small_body_forwarded(upstream_server):
    server, hits = upstream_server
    config = ProxyRuntimeConfig(
        listen_address="127.0.0.1:0",
        upstream_base=server.url,
        policy=GatewayOffloadPolicy(max_body_bytes=1024, rate_per_second=1000,
                                    burst=1000),
    )
    with ProxyServer(config) as proxy:
        client = UpstreamClient(proxy.url)
        response = client(HttpRequest(method="POST", path="/upload",
                                      headers=Headers(), body=b"z" * 100))

    assert response.status == 200
    assert json.loads(response.body)["body_len"] == 100
    assert hits["count"] == 1
