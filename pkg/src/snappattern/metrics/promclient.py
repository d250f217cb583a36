"""Prometheus HTTP API client (query_range only) and sample extraction."""

from __future__ import annotations

from dataclasses import dataclass

import requests


class QueryError(Exception):
    """The endpoint answered with an error status or was unreachable."""


class ResponseParseError(Exception):
    """The endpoint's body did not match the query_range response shape."""


@dataclass(frozen=True)
class SeriesPoint:
    timestamp_s: float
    value: float


@dataclass(frozen=True)
class Series:
    labels: dict
    points: tuple[SeriesPoint, ...]

    def __hash__(self):  # labels dict excluded; identity by content as tuple
        return hash((tuple(sorted(self.labels.items())), self.points))


@dataclass(frozen=True)
class EnergySample:
    timestamp_s: float
    namespace: str
    pod: str
    joules_total: float


@dataclass(frozen=True)
class PromQueryTemplate:
    name: str
    template: str  # placeholders: {namespace}, {range}

    def render(self, namespace: str, range_s: int) -> str:
        rendered = self.template.replace("{namespace}", namespace)
        rendered = rendered.replace("{range}", f"{range_s}s")
        if "{namespace}" in rendered or "{range}" in rendered:
            raise ValueError(f"template {self.name!r} left placeholders unsubstituted")
        return rendered


def query_range(endpoint_url: str, query: str, start_s: float, end_s: float,
                step_s: int, timeout_s: float = 30.0) -> list[Series]:
    """Run a range query and parse the matrix result into Series records."""
    if start_s >= end_s:
        raise ValueError("start must precede end")
    if step_s <= 0:
        raise ValueError("step must be positive")
    url = endpoint_url.rstrip("/") + "/api/v1/query_range"
    try:
        response = requests.get(url, params={
            "query": query,
            "start": start_s,
            "end": end_s,
            "step": step_s,
        }, timeout=timeout_s)
    except requests.RequestException as exc:
        raise QueryError(f"query_range request failed: {exc}") from exc

    try:
        payload = response.json()
    except ValueError as exc:
        raise ResponseParseError(f"non-JSON response (HTTP {response.status_code})") from exc

    if payload.get("status") != "success":
        raise QueryError(payload.get("error", f"HTTP {response.status_code}"))

    try:
        result = payload["data"]["result"]
        series = []
        for entry in result:
            points = tuple(SeriesPoint(float(ts), float(value))
                           for ts, value in entry["values"])
            series.append(Series(labels=dict(entry.get("metric", {})), points=points))
        return series
    except (KeyError, TypeError, ValueError) as exc:
        raise ResponseParseError(f"malformed query_range body: {exc}") from exc


def to_energy_samples(series: list[Series], fallback_namespace: str = "") -> list[EnergySample]:
    """Flatten series into per-pod counter samples, label-extracting
    namespace and pod (Kepler labels the namespace as container_namespace)."""
    samples: list[EnergySample] = []
    for s in series:
        namespace = (s.labels.get("namespace")
                     or s.labels.get("container_namespace")
                     or fallback_namespace)
        pod = s.labels.get("pod") or s.labels.get("pod_name") or ""
        for point in s.points:
            samples.append(EnergySample(
                timestamp_s=point.timestamp_s,
                namespace=namespace,
                pod=pod,
                joules_total=point.value,
            ))
    samples.sort(key=lambda s: (s.namespace, s.pod, s.timestamp_s))
    return samples
