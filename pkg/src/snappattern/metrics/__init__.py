"""Namespace-attributed energy and latency collection via Prometheus."""

from .collect import (  # noqa: F401
    DEFAULT_TEMPLATES,
    MetricsRow,
    MetricsTable,
    RowKey,
    RunMeta,
    collect_run,
)
from .export import (  # noqa: F401
    CSV_COLUMNS,
    csv_bytes,
    export_csv,
    export_series,
    series_json_bytes,
    write_series_json,
)
from .plots import render_energy_figures  # noqa: F401
from .promclient import (  # noqa: F401
    EnergySample,
    PromQueryTemplate,
    QueryError,
    ResponseParseError,
    Series,
    SeriesPoint,
    query_range,
    to_energy_samples,
)
from .windows import (  # noqa: F401
    DEFAULT_WINDOW_SECONDS,
    EnergyWindow,
    NamespaceTotals,
    attribute_by_namespace,
    sum_by_namespace_window,
    window_energy,
)
