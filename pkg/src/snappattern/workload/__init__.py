"""Ramped closed-loop workload generation and reporting."""

from .profiles import (  # noqa: F401
    STEP_USERS,
    RequestTemplate,
    WorkloadProfile,
    concurrency_at,
    named_profile,
)
from .report import (  # noqa: F401
    OUTCOME_CSV_HEADER,
    StepAggregate,
    WorkloadReport,
    nearest_rank,
    read_outcomes_csv,
    summarize,
    write_outcomes_csv,
)
from .runner import TRANSPORT_ERROR_MARKER, LoadRun, RequestOutcome, run_load  # noqa: F401
