"""Run a pattern proxy as an HTTP server in front of one upstream."""

from __future__ import annotations

import logging

from ..httpkit import ServerHandle
from .handlers import PatternHandler, build_from_config
from .policies import ProxyRuntimeConfig, load_policy_document

logger = logging.getLogger(__name__)


class ProxyServer:
    """A bound pattern proxy: handler plus listening HTTP server."""

    def __init__(self, config: ProxyRuntimeConfig, handler: PatternHandler | None = None):
        self.config = config
        self.handler = handler or build_from_config(config)
        host, _, port = config.listen_address.rpartition(":")
        self._server = ServerHandle(self.handler, host=host or "127.0.0.1", port=int(port))

    @property
    def url(self) -> str:
        return self._server.url

    @property
    def port(self) -> int:
        return self._server.port

    def close(self) -> None:
        self._server.close()
        self.handler.close()

    def __enter__(self) -> "ProxyServer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def config_from_file(path: str, listen: str, upstream: str) -> ProxyRuntimeConfig:
    with open(path, "r", encoding="utf-8") as fh:
        policy = load_policy_document(fh.read())
    config = ProxyRuntimeConfig(listen_address=listen, upstream_base=upstream, policy=policy)
    config.validate()
    return config


def run_proxy(config: ProxyRuntimeConfig) -> None:
    """Blocking entry point used by the CLI."""
    server = ProxyServer(config)
    logger.info("pattern proxy listening on %s, upstream %s",
                server.url, config.upstream_base)
    try:
        import threading
        threading.Event().wait()
    finally:
        server.close()
