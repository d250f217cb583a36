"""Energy counter windowing and namespace attribution.

Counters are folded into fixed windows (10 s by default, matching the
joules-per-10-seconds reporting grain). The boundary rule is "latest sample
at or before the boundary", with no interpolation, so window sums conserve
the counter delta exactly. A counter reset contributes the post-reset value
for its segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .promclient import EnergySample

DEFAULT_WINDOW_SECONDS = 10


@dataclass(frozen=True)
class EnergyWindow:
    window_start_s: float
    window_seconds: int
    namespace: str
    pod: str
    joules: float


@dataclass(frozen=True)
class NamespaceTotals:
    per_namespace: dict
    grand_total: float


def window_energy(samples: list[EnergySample],
                  window_seconds: int = DEFAULT_WINDOW_SECONDS) -> list[EnergyWindow]:
    """Window one (namespace, pod) counter series into joules per window.

    The window grid is aligned to the first sample's timestamp. Fewer than
    two samples carry no delta information and yield no windows.
    """
    if len(samples) < 2:
        return []
    namespace, pod = samples[0].namespace, samples[0].pod

    # Reset-adjusted cumulative consumption at each sample.
    cumulative = [0.0]
    for prev, cur in zip(samples, samples[1:]):
        delta = cur.joules_total - prev.joules_total
        if delta < 0:  # counter reset: the post-reset value is the new spend
            delta = cur.joules_total
        cumulative.append(cumulative[-1] + delta)

    t0 = samples[0].timestamp_s
    t_last = samples[-1].timestamp_s
    if t_last <= t0:
        return []
    window_count = math.ceil((t_last - t0) / window_seconds)

    def consumption_at(boundary: float) -> float:
        value = 0.0
        for sample, cum in zip(samples, cumulative):
            if sample.timestamp_s <= boundary:
                value = cum
            else:
                break
        return value

    windows = []
    for k in range(window_count):
        start = t0 + k * window_seconds
        end = t0 + (k + 1) * window_seconds
        windows.append(EnergyWindow(
            window_start_s=start,
            window_seconds=window_seconds,
            namespace=namespace,
            pod=pod,
            joules=consumption_at(end) - consumption_at(start),
        ))
    return windows


def attribute_by_namespace(windows: list[EnergyWindow]) -> NamespaceTotals:
    """Total joules per namespace plus the grand total over all pods."""
    per_namespace: dict = {}
    for w in windows:
        per_namespace[w.namespace] = per_namespace.get(w.namespace, 0.0) + w.joules
    return NamespaceTotals(per_namespace=per_namespace,
                           grand_total=sum(per_namespace.values()))


def sum_by_namespace_window(windows: list[EnergyWindow]) -> dict:
    """Aggregate pod windows into (namespace, window_start) joules sums."""
    sums: dict = {}
    for w in windows:
        key = (w.namespace, w.window_start_s)
        sums[key] = sums.get(key, 0.0) + w.joules
    return sums
