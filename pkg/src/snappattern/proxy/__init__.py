"""Reverse proxy runtime applying one cloud design pattern per instance."""

from .breaker import (  # noqa: F401
    CircuitBreaker,
    CircuitState,
    Closed,
    Decision,
    HalfOpen,
    Open,
    Outcome,
    cb_admit,
    cb_transition,
)
from .handlers import build_from_config, build_handler  # noqa: F401
from .policies import (  # noqa: F401
    AsyncReplyPolicy,
    CacheAsidePolicy,
    CircuitBreakerPolicy,
    CollapsePolicy,
    GatewayOffloadPolicy,
    PatternPolicy,
    ProxyRuntimeConfig,
    RetryPolicy,
    build_policy,
    dump_policy_document,
    load_policy_document,
    pattern_name,
)
from .server import ProxyServer, config_from_file, run_proxy  # noqa: F401
