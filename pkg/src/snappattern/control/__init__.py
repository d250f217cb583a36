"""Orchestration backend and API for the pattern toolkit."""

from .api import create_app  # noqa: F401
from .config import CONFIG_ENV_VAR, ControlConfig, Namespaces, load_config  # noqa: F401
from .executor import (  # noqa: F401
    ClusterExecutor,
    ExecutorResult,
    FakeExecutor,
    ServiceInfo,
    ShellExecutor,
)
from .records import InjectionRecord, InjectionRegistry, RunRecord, RunRegistry  # noqa: F401
from .service import ApiError, ControlService, selection_from_dict, selection_to_dict  # noqa: F401
