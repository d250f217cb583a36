"""Static manifest assets bundled with the package."""

from __future__ import annotations

from importlib import resources


def read_asset(relative_path: str) -> str:
    return (resources.files(__package__) / relative_path).read_text(encoding="utf-8")


def sample_pipeline_text() -> str:
    """The bundled demo pipeline: 6 services in the 'pipeline' namespace."""
    return read_asset("sample_pipeline.yaml")


MONITORING_ASSETS = ("monitoring/prometheus.yaml", "monitoring/kepler.yaml",
                     "monitoring/otel-collector.yaml")


def monitoring_assets() -> list[tuple[str, str]]:
    """Pinned monitoring-stack manifests applied on cluster creation."""
    return [(name, read_asset(name)) for name in MONITORING_ASSETS]
