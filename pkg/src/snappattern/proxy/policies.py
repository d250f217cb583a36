"""Pattern policy records and the proxy policy document format.

A policy document is a YAML or JSON file with a top-level ``pattern`` key
naming exactly one pattern, plus a parameter block for it. Every parameter
can be overridden through an environment variable named
``SNAP_<UPPERCASE_PARAM>``, which is how the generated ConfigMaps feed a
proxy container at runtime.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Mapping
from urllib.parse import urlsplit

import yaml

ENV_PREFIX = "SNAP_"

DEFAULT_FAILURE_STATUSES = frozenset({500, 502, 503, 504})
DEFAULT_RETRYABLE_STATUSES = frozenset({502, 503, 504})


class PolicyError(ValueError):
    """A policy document or parameter value violates its contract."""


@dataclass(frozen=True)
class RetryPolicy:
    max_retries: int = 2
    backoff_base_ms: int = 100
    backoff_multiplier: float = 2.0
    retryable_statuses: frozenset[int] = DEFAULT_RETRYABLE_STATUSES
    retry_on_transport_error: bool = True

    def validate(self) -> None:
        if self.max_retries < 0:
            raise PolicyError("max_retries must be >= 0")
        if self.backoff_base_ms <= 0:
            raise PolicyError("backoff_base_ms must be positive")
        if self.backoff_multiplier < 1:
            raise PolicyError("backoff_multiplier must be >= 1")


@dataclass(frozen=True)
class CircuitBreakerPolicy:
    failure_threshold: int = 5
    open_duration_ms: int = 10_000
    half_open_max_probes: int = 1
    failure_statuses: frozenset[int] = DEFAULT_FAILURE_STATUSES
    retry: RetryPolicy = field(default_factory=RetryPolicy)

    def validate(self) -> None:
        if self.failure_threshold < 1:
            raise PolicyError("failure_threshold must be >= 1")
        if self.open_duration_ms <= 0:
            raise PolicyError("open_duration_ms must be positive")
        if self.half_open_max_probes < 1:
            raise PolicyError("half_open_max_probes must be >= 1")
        if any(s < 400 or s > 599 for s in self.failure_statuses):
            raise PolicyError("failure_statuses must lie within [400, 599]")
        self.retry.validate()


@dataclass(frozen=True)
class CacheAsidePolicy:
    ttl_seconds: int = 30
    max_entries: int = 1024
    cacheable_methods: frozenset[str] = frozenset({"GET"})
    vary_headers: tuple[str, ...] = ()
    max_cacheable_body_bytes: int = 1_048_576

    def validate(self) -> None:
        if self.ttl_seconds <= 0:
            raise PolicyError("ttl_seconds must be positive")
        if self.max_entries <= 0:
            raise PolicyError("max_entries must be positive")
        if self.max_cacheable_body_bytes <= 0:
            raise PolicyError("max_cacheable_body_bytes must be positive")


@dataclass(frozen=True)
class CollapsePolicy:
    max_waiters: int = 256
    wait_timeout_ms: int = 5_000
    vary_headers: tuple[str, ...] = ()

    def validate(self) -> None:
        if self.max_waiters <= 0:
            raise PolicyError("max_waiters must be positive")
        if self.wait_timeout_ms <= 0:
            raise PolicyError("wait_timeout_ms must be positive")


@dataclass(frozen=True)
class AsyncReplyPolicy:
    wrapped_path_prefixes: tuple[str, ...] = ("/",)
    job_ttl_seconds: int = 300
    worker_concurrency: int = 4
    poll_path_prefix: str = "/jobs"
    # Bound on queued-but-unstarted jobs; a full queue rejects with 503.
    queue_max_depth: int = 1024

    def validate(self) -> None:
        if self.job_ttl_seconds <= 0:
            raise PolicyError("job_ttl_seconds must be positive")
        if self.worker_concurrency <= 0:
            raise PolicyError("worker_concurrency must be positive")
        if self.queue_max_depth <= 0:
            raise PolicyError("queue_max_depth must be positive")
        if not self.poll_path_prefix.startswith("/"):
            raise PolicyError("poll_path_prefix must start with '/'")
        # The poll prefix is routed before wrapping, so the two stay disjoint
        # unless a wrapped prefix sits inside the poll namespace itself.
        for prefix in self.wrapped_path_prefixes:
            if prefix.startswith(self.poll_path_prefix):
                raise PolicyError(
                    f"wrapped prefix {prefix!r} overlaps poll_path_prefix "
                    f"{self.poll_path_prefix!r}"
                )


@dataclass(frozen=True)
class GatewayOffloadPolicy:
    rate_per_second: float = 50.0
    burst: int = 100
    max_body_bytes: int = 1_048_576
    # "source-address" or "header:<name>" to key buckets on a client header.
    client_key: str = "source-address"

    def validate(self) -> None:
        if self.rate_per_second <= 0:
            raise PolicyError("rate_per_second must be positive")
        if self.burst <= 0:
            raise PolicyError("burst must be positive")
        if self.max_body_bytes <= 0:
            raise PolicyError("max_body_bytes must be positive")
        if self.client_key != "source-address" and not self.client_key.startswith("header:"):
            raise PolicyError("client_key must be 'source-address' or 'header:<name>'")


PatternPolicy = (
    CircuitBreakerPolicy
    | CacheAsidePolicy
    | CollapsePolicy
    | AsyncReplyPolicy
    | GatewayOffloadPolicy
)

PATTERN_NAMES: dict[str, type] = {
    "circuit_breaker": CircuitBreakerPolicy,
    "cache_aside": CacheAsidePolicy,
    "request_collapsing": CollapsePolicy,
    "gateway_offloading": GatewayOffloadPolicy,
    "async_request_reply": AsyncReplyPolicy,
}

PATTERN_NAME_BY_TYPE = {cls: name for name, cls in PATTERN_NAMES.items()}


@dataclass(frozen=True)
class ProxyRuntimeConfig:
    listen_address: str
    upstream_base: str
    policy: PatternPolicy
    upstream_connect_timeout_ms: int = 2_000
    upstream_request_timeout_ms: int = 30_000

    def validate(self) -> None:
        if self.upstream_connect_timeout_ms <= 0 or self.upstream_request_timeout_ms <= 0:
            raise PolicyError("upstream timeouts must be positive")
        # Guard against the proxy pointing at its own swapped DNS name. For
        # service names the name alone identifies the route; for IP literals
        # (local testing) the port disambiguates processes.
        listen_host, _, listen_port = self.listen_address.rpartition(":")
        upstream = urlsplit(self.upstream_base)
        upstream_host = upstream.hostname or ""
        if upstream_host and upstream_host == listen_host:
            is_ip = upstream_host.replace(".", "").isdigit() or ":" in upstream_host
            same_port = str(upstream.port or 80) == listen_port
            if not is_ip or same_port:
                raise PolicyError(
                    "upstream_base must differ from the proxy's own listen address"
                )
        self.policy.validate()  # type: ignore[union-attr]


def pattern_name(policy: PatternPolicy) -> str:
    return PATTERN_NAME_BY_TYPE[type(policy)]


def _coerce(value: str, target_type) -> object:
    """Parse an environment-variable string into a policy field value."""
    if target_type is bool:
        return value.strip().lower() in ("1", "true", "yes", "on")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return yaml.safe_load(value)


def _field_value(f: dataclasses.Field, raw: object) -> object:
    name = f.name
    if raw is None:
        raise PolicyError(f"parameter {name!r} must not be null")
    if name in ("failure_statuses", "retryable_statuses"):
        return frozenset(int(s) for s in raw)  # type: ignore[union-attr]
    if name == "cacheable_methods":
        return frozenset(str(m).upper() for m in raw)  # type: ignore[union-attr]
    if name in ("vary_headers", "wrapped_path_prefixes"):
        return tuple(str(v) for v in raw)  # type: ignore[union-attr]
    return raw


def build_policy(pattern: str, params: Mapping[str, object],
                 env: Mapping[str, str] | None = None) -> PatternPolicy:
    """Instantiate the policy for ``pattern``, applying env overrides last."""
    if pattern not in PATTERN_NAMES:
        raise PolicyError(
            f"unknown pattern {pattern!r}; expected one of {sorted(PATTERN_NAMES)}"
        )
    env = os.environ if env is None else env
    cls = PATTERN_NAMES[pattern]
    kwargs: dict[str, object] = {}
    fields = {f.name: f for f in dataclasses.fields(cls)}

    params = dict(params)
    retry_block = params.pop("retry", None)
    for name, value in params.items():
        if name not in fields:
            raise PolicyError(f"unknown parameter {name!r} for pattern {pattern!r}")
        kwargs[name] = _field_value(fields[name], value)

    if cls is CircuitBreakerPolicy:
        retry_fields = {f.name: f for f in dataclasses.fields(RetryPolicy)}
        retry_kwargs: dict[str, object] = {}
        for name, value in dict(retry_block or {}).items():
            if name not in retry_fields:
                raise PolicyError(f"unknown retry parameter {name!r}")
            retry_kwargs[name] = _field_value(retry_fields[name], value)
        for name, f in retry_fields.items():
            env_name = ENV_PREFIX + name.upper()
            if env_name in env:
                retry_kwargs[name] = _field_value(f, _coerce(env[env_name], _plain_type(f)))
        kwargs["retry"] = RetryPolicy(**retry_kwargs)  # type: ignore[arg-type]

    for name, f in fields.items():
        if name == "retry":
            continue
        env_name = ENV_PREFIX + name.upper()
        if env_name in env:
            kwargs[name] = _field_value(f, _coerce(env[env_name], _plain_type(f)))

    policy = cls(**kwargs)  # type: ignore[arg-type]
    policy.validate()
    return policy


def _plain_type(f: dataclasses.Field):
    """Best-effort scalar type for env parsing; collections fall back to YAML."""
    mapping = {
        "int": int,
        "float": float,
        "bool": bool,
        "str": str,
    }
    return mapping.get(str(f.type).replace("builtins.", ""), object)


def load_policy_document(text: str, env: Mapping[str, str] | None = None) -> PatternPolicy:
    """Parse a policy document (YAML or JSON text) into a policy record."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise PolicyError(f"policy document is not valid YAML/JSON: {exc}") from exc
    if not isinstance(doc, dict) or "pattern" not in doc:
        raise PolicyError("policy document must be a mapping with a 'pattern' key")
    pattern = str(doc["pattern"])
    params = doc.get(pattern, {})
    if params is None:
        params = {}
    if not isinstance(params, dict):
        raise PolicyError(f"parameter block {pattern!r} must be a mapping")
    return build_policy(pattern, params, env=env)


def policy_params(policy: PatternPolicy) -> dict:
    """Plain JSON-friendly parameter dict in declaration order."""
    block: dict[str, object] = {}
    for f in dataclasses.fields(policy):
        value = getattr(policy, f.name)
        if isinstance(value, frozenset):
            value = sorted(value)
        elif isinstance(value, tuple):
            value = list(value)
        elif isinstance(value, RetryPolicy):
            value = {
                rf.name: (sorted(v) if isinstance(v := getattr(value, rf.name), frozenset) else v)
                for rf in dataclasses.fields(RetryPolicy)
            }
        block[f.name] = value
    return block


def dump_policy_document(policy: PatternPolicy, upstream: str | None = None) -> str:
    """Serialize a policy into the document format (stable key order)."""
    name = pattern_name(policy)
    doc: dict[str, object] = {"pattern": name, name: policy_params(policy)}
    if upstream is not None:
        doc["upstream"] = upstream
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)
