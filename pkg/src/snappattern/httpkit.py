"""Minimal HTTP plumbing shared by the pattern proxy and the fixture services.

Everything here is deliberately small: a case-insensitive header map, plain
request/response records, a threaded server that adapts a ``handler(request)
-> response`` callable onto the standard-library HTTP server, and an upstream
client built on ``http.client``. Handlers receive the request body as a lazy
stream so a gateway can enforce size limits without buffering first.
"""

from __future__ import annotations

import http.client
import logging
import socket
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import BinaryIO, Callable, Iterable, Mapping
from urllib.parse import urlsplit

logger = logging.getLogger(__name__)

# Connection-scoped headers that must never be forwarded through a proxy.
HOP_BY_HOP = frozenset({
    "connection",
    "keep-alive",
    "proxy-authenticate",
    "proxy-authorization",
    "te",
    "trailers",
    "transfer-encoding",
    "upgrade",
})


class TransportError(Exception):
    """Connection-level failure talking to an upstream (refused, reset, timeout)."""


class BodyTooLarge(Exception):
    """Raised by capped body reads once the byte limit is crossed."""

    def __init__(self, limit: int):
        super().__init__(f"request body exceeds {limit} bytes")
        self.limit = limit


class Headers(dict):
    """Single-valued header map with case-insensitive names (stored lowercase)."""

    def __init__(self, items: Mapping[str, str] | Iterable[tuple[str, str]] = ()):
        super().__init__()
        if isinstance(items, Mapping):
            items = items.items()
        for name, value in items:
            self[name] = value

    def __setitem__(self, name: str, value) -> None:
        super().__setitem__(name.lower(), str(value))

    def __getitem__(self, name: str) -> str:
        return super().__getitem__(name.lower())

    def __contains__(self, name) -> bool:
        return super().__contains__(str(name).lower())

    def get(self, name: str, default=None):
        return super().get(name.lower(), default)

    def pop(self, name: str, *args):
        return super().pop(name.lower(), *args)

    def setdefault(self, name: str, default=None):
        return super().setdefault(name.lower(), str(default))

    def copy(self) -> "Headers":
        return Headers(self)


@dataclass
class HttpRequest:
    method: str
    path: str
    query: str = ""
    headers: Headers = field(default_factory=Headers)
    body: bytes = b""
    # Unread body source. content_length is the declared length, None when the
    # length is undeclared (chunked transfer).
    stream: BinaryIO | None = None
    content_length: int | None = None
    client_address: str = ""

    def read_body(self) -> bytes:
        """Buffer the remaining body into ``self.body`` and return it."""
        if self.stream is not None:
            chunks = []
            while True:
                chunk = self.stream.read(65536)
                if not chunk:
                    break
                chunks.append(chunk)
            self.body = self.body + b"".join(chunks)
            self.stream = None
        return self.body

    def read_body_capped(self, limit: int) -> bytes:
        """Buffer the body, raising BodyTooLarge as soon as > limit bytes appear.

        At most limit + 1 bytes are consumed from the stream.
        """
        if self.stream is None:
            if len(self.body) > limit:
                raise BodyTooLarge(limit)
            return self.body
        received = len(self.body)
        chunks = [self.body]
        while True:
            budget = limit + 1 - received
            chunk = self.stream.read(min(65536, budget))
            if not chunk:
                break
            received += len(chunk)
            chunks.append(chunk)
            if received > limit:
                raise BodyTooLarge(limit)
        self.body = b"".join(chunks)
        self.stream = None
        return self.body


@dataclass
class HttpResponse:
    status: int
    headers: Headers = field(default_factory=Headers)
    body: bytes = b""

    def copy(self) -> "HttpResponse":
        return HttpResponse(self.status, self.headers.copy(), self.body)


Handler = Callable[[HttpRequest], HttpResponse]
Upstream = Callable[[HttpRequest], HttpResponse]


def json_response(status: int, payload, extra_headers: Headers | None = None) -> HttpResponse:
    import json

    headers = Headers({"content-type": "application/json"})
    if extra_headers:
        headers.update(extra_headers)
    return HttpResponse(status, headers, json.dumps(payload).encode("utf-8"))


def text_response(status: int, text: str, content_type: str = "text/plain") -> HttpResponse:
    return HttpResponse(status, Headers({"content-type": content_type}), text.encode("utf-8"))


class LimitedReader:
    """Reads at most ``length`` bytes from an underlying socket file."""

    def __init__(self, raw: BinaryIO, length: int):
        self._raw = raw
        self.remaining = length

    def read(self, n: int = -1) -> bytes:
        if self.remaining <= 0:
            return b""
        if n is None or n < 0 or n > self.remaining:
            n = self.remaining
        data = self._raw.read(n)
        self.remaining -= len(data)
        return data


class ChunkedReader:
    """Decodes a chunked transfer-encoded body from a socket file."""

    def __init__(self, raw: BinaryIO):
        self._raw = raw
        self._chunk_left = 0
        self.done = False

    def _next_chunk(self) -> None:
        line = self._raw.readline(1024).strip()
        if b";" in line:
            line = line.split(b";", 1)[0]
        size = int(line, 16)
        if size == 0:
            # Consume trailer section up to the blank line.
            while True:
                trailer = self._raw.readline(1024)
                if trailer in (b"\r\n", b"\n", b""):
                    break
            self.done = True
        self._chunk_left = size

    def read(self, n: int = -1) -> bytes:
        out = bytearray()
        while not self.done and (n < 0 or len(out) < n):
            if self._chunk_left == 0:
                self._next_chunk()
                continue
            want = self._chunk_left if n < 0 else min(self._chunk_left, n - len(out))
            data = self._raw.read(want)
            if not data:
                raise TransportError("truncated chunked body")
            out.extend(data)
            self._chunk_left -= len(data)
            if self._chunk_left == 0:
                self._raw.readline(16)  # trailing CRLF after each chunk
        return bytes(out)


class _AppServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True
    app: Handler


class _AppRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "snappattern"

    def log_message(self, fmt, *args):  # noqa: A003 - stdlib hook
        logger.debug("%s %s", self.address_string(), fmt % args)

    def _build_request(self) -> HttpRequest:
        path, _, query = self.path.partition("?")
        headers = Headers(self.headers.items())
        stream = None
        content_length: int | None = 0
        if headers.get("transfer-encoding", "").lower() == "chunked":
            stream = ChunkedReader(self.rfile)
            content_length = None
        elif "content-length" in headers:
            content_length = int(headers["content-length"])
            stream = LimitedReader(self.rfile, content_length) if content_length else None
        return HttpRequest(
            method=self.command,
            path=path,
            query=query,
            headers=headers,
            stream=stream,
            content_length=content_length,
            client_address=self.client_address[0],
        )

    def _dispatch(self) -> None:
        request = self._build_request()
        try:
            response = self.server.app(request)  # type: ignore[attr-defined]
        except Exception:
            logger.exception("handler raised for %s %s", self.command, self.path)
            response = json_response(500, {"error": "internal server error"})
        # A partially consumed request body poisons keep-alive framing.
        if isinstance(request.stream, LimitedReader) and request.stream.remaining > 0:
            self.close_connection = True
        if isinstance(request.stream, ChunkedReader) and not request.stream.done:
            self.close_connection = True
        self.send_response(response.status)
        for name, value in response.headers.items():
            if name in HOP_BY_HOP or name == "content-length":
                continue
            self.send_header(name, value)
        self.send_header("Content-Length", str(len(response.body)))
        if self.close_connection:
            self.send_header("Connection", "close")
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(response.body)

    do_GET = _dispatch
    do_POST = _dispatch
    do_PUT = _dispatch
    do_DELETE = _dispatch
    do_PATCH = _dispatch
    do_HEAD = _dispatch
    do_OPTIONS = _dispatch


class ServerHandle:
    """A handler callable served on a background thread; close() to stop."""

    def __init__(self, app: Handler, host: str = "127.0.0.1", port: int = 0):
        self._server = _AppServer((host, port), _AppRequestHandler)
        self._server.app = app
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        host = self._server.server_address[0]
        return f"http://{host}:{self.port}"

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "ServerHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _clean_forward_headers(headers: Headers, host: str) -> dict[str, str]:
    out = {}
    for name, value in headers.items():
        if name in HOP_BY_HOP or name in ("host", "content-length"):
            continue
        out[name] = value
    out["Host"] = host
    return out


class UpstreamClient:
    """Forwards requests to one upstream base URL over fresh connections.

    Raises TransportError on connect failures, resets, and timeouts so
    callers can map them to a single gateway-error policy.
    """

    def __init__(self, base_url: str, connect_timeout_ms: int = 2000,
                 request_timeout_ms: int = 30000):
        parts = urlsplit(base_url)
        if parts.scheme not in ("http", ""):
            raise ValueError(f"unsupported upstream scheme: {parts.scheme!r}")
        self.host = parts.hostname or base_url
        self.port = parts.port or 80
        self.base_path = parts.path.rstrip("/")
        self._connect_timeout_s = connect_timeout_ms / 1000.0
        self._request_timeout_s = request_timeout_ms / 1000.0

    def __call__(self, request: HttpRequest) -> HttpResponse:
        body = request.read_body()
        target = self.base_path + request.path
        if request.query:
            target = f"{target}?{request.query}"
        conn = http.client.HTTPConnection(self.host, self.port,
                                          timeout=self._connect_timeout_s)
        try:
            conn.connect()
            if conn.sock is not None:
                conn.sock.settimeout(self._request_timeout_s)
            conn.request(request.method, target or "/", body=body or None,
                         headers=_clean_forward_headers(request.headers, self.host))
            raw = conn.getresponse()
            payload = raw.read()
            headers = Headers(
                (k, v) for k, v in raw.getheaders() if k.lower() not in HOP_BY_HOP
            )
            headers.pop("content-length", None)
            return HttpResponse(raw.status, headers, payload)
        except (OSError, socket.timeout, http.client.HTTPException) as exc:
            raise TransportError(f"{request.method} {target}: {exc}") from exc
        finally:
            conn.close()
