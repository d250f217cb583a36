"""Desk-scale stand-ins for the pipeline's transformation services."""

from .servers import (  # noqa: F401
    STAGE_NAMES,
    CoordinatorApp,
    FixturePipeline,
    apply_stage,
    data_product_app,
    stage_app,
)
from .stages import (  # noqa: F401
    RECORD_FIELDS,
    StageError,
    aggregate_records,
    anonymize_records,
    filter_records,
    format_records,
    sample_records,
)
