"""Control-service configuration.

The config file (YAML or JSON) carries the namespace layout, executor mode,
Prometheus URL and data directory; SNAPPATTERN_CONFIG points at it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

CONFIG_ENV_VAR = "SNAPPATTERN_CONFIG"


@dataclass
class Namespaces:
    pipeline: str = "pipeline"
    patterns: str = "snappattern-patterns"
    monitoring: str = "monitoring"


@dataclass
class ControlConfig:
    data_dir: Path = field(default_factory=lambda: Path("./snappattern-data"))
    executor_mode: str = "fake"  # real | fake
    prometheus_url: str = "http://127.0.0.1:9090"
    namespaces: Namespaces = field(default_factory=Namespaces)
    readiness_timeout_ms: int = 60_000
    cluster_cpus: int = 8
    cluster_memory_gb: int = 24

    def validate(self) -> None:
        if self.executor_mode not in ("real", "fake"):
            raise ValueError(f"executor mode must be real or fake, got {self.executor_mode!r}")


def load_config(path: str | os.PathLike | None = None,
                env: dict | None = None) -> ControlConfig:
    env = dict(os.environ if env is None else env)
    if path is None:
        path = env.get(CONFIG_ENV_VAR)
    config = ControlConfig()
    if path:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        namespaces = raw.get("namespaces", {}) or {}
        config = ControlConfig(
            data_dir=Path(raw.get("data_dir", config.data_dir)),
            executor_mode=raw.get("executor", config.executor_mode),
            prometheus_url=raw.get("prometheus_url", config.prometheus_url),
            namespaces=Namespaces(
                pipeline=namespaces.get("pipeline", "pipeline"),
                patterns=namespaces.get("patterns", "snappattern-patterns"),
                monitoring=namespaces.get("monitoring", "monitoring"),
            ),
            readiness_timeout_ms=int(raw.get("readiness_timeout_ms", config.readiness_timeout_ms)),
            cluster_cpus=int(raw.get("cluster_cpus", config.cluster_cpus)),
            cluster_memory_gb=int(raw.get("cluster_memory_gb", config.cluster_memory_gb)),
        )
    config.validate()
    return config
