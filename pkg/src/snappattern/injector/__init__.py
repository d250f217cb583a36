"""Kubernetes manifest transformation: DNS-swap injection and removal plans."""

from .model import (  # noqa: F401
    DEFAULT_PATTERN_NAMESPACE,
    ConflictError,
    GeneratedResource,
    InjectionPlan,
    InjectorError,
    ManifestParseError,
    NotFoundError,
    NotInjectedError,
    PatternKind,
    PatternSelection,
    ReadinessReport,
    ResourceRef,
    SelectionInvalid,
    ServiceRename,
    ValidationIssue,
    WorkloadManifestSet,
)
from .parse import build_set, parse_manifests  # noqa: F401
from .plan import (  # noqa: F401
    apply_plan,
    plan_injection,
    plan_removal,
    semantic_model,
    validate_selection,
)
from .readiness import check_readiness  # noqa: F401
from .render import (  # noqa: F401
    canonicalize,
    render_document,
    render_ingress_offload,
    render_plan,
    render_stream,
)
from .sqlcache import SqlCacheParams, SqlRuleError, render_sql_cache_config  # noqa: F401
