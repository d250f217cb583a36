"""Domain model for manifest transformation: parsed sets, selections, plans."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..proxy.policies import PatternPolicy
from .sqlcache import SqlCacheParams

DEFAULT_PATTERN_NAMESPACE = "snappattern-patterns"

LABEL_PATTERN = "snappattern/pattern"
LABEL_TARGET = "snappattern/target"

INDEXED_KINDS = ("Deployment", "Service", "ConfigMap", "Ingress")


class InjectorError(Exception):
    """Base class for manifest transformation failures."""


class ManifestParseError(InjectorError):
    def __init__(self, message: str, document_index: int, line: int | None = None):
        location = f"document {document_index}"
        if line is not None:
            location += f", line {line}"
        super().__init__(f"{message} ({location})")
        self.document_index = document_index
        self.line = line


class ConflictError(InjectorError):
    pass


class NotFoundError(InjectorError):
    pass


class NotInjectedError(InjectorError):
    pass


class SelectionInvalid(InjectorError):
    def __init__(self, issues: list["ValidationIssue"]):
        super().__init__("; ".join(f"{i.code}: {i.message}" for i in issues))
        self.issues = issues


@dataclass(frozen=True)
class ValidationIssue:
    code: str  # machine-readable, e.g. TARGET_NOT_FOUND, PARAM_RANGE
    message: str


@dataclass(frozen=True)
class ResourceRef:
    kind: str
    namespace: str
    name: str

    @classmethod
    def for_document(cls, doc: dict) -> "ResourceRef":
        meta = doc.get("metadata", {}) or {}
        return cls(kind=str(doc.get("kind", "")),
                   namespace=str(meta.get("namespace", "default")),
                   name=str(meta.get("name", "")))


class PatternKind(enum.Enum):
    CB = "circuit_breaker"
    CA = "cache_aside"
    RC = "request_collapsing"
    GO = "gateway_offloading"
    ARR = "async_request_reply"

    @property
    def policy_name(self) -> str:
        return self.value


@dataclass
class WorkloadManifestSet:
    """Parsed multi-document manifest stream with an identity index.

    Only Deployment/Service/ConfigMap/Ingress documents are indexed; any
    other kind is preserved verbatim in ``documents`` and flagged with a
    warning.
    """

    documents: list[dict] = field(default_factory=list)
    index: dict[ResourceRef, dict] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def get(self, kind: str, namespace: str, name: str) -> dict | None:
        return self.index.get(ResourceRef(kind, namespace, name))

    def services(self, namespace: str | None = None) -> list[dict]:
        return [doc for ref, doc in self.index.items()
                if ref.kind == "Service" and (namespace is None or ref.namespace == namespace)]

    def service_names(self, namespace: str) -> set[str]:
        return {ref.name for ref in self.index
                if ref.kind == "Service" and ref.namespace == namespace}

    def deployments(self, namespace: str | None = None) -> list[dict]:
        return [doc for ref, doc in self.index.items()
                if ref.kind == "Deployment" and (namespace is None or ref.namespace == namespace)]

    def labelled(self, label: str, value: str) -> list[tuple[ResourceRef, dict]]:
        out = []
        for ref, doc in self.index.items():
            labels = (doc.get("metadata", {}) or {}).get("labels", {}) or {}
            if labels.get(label) == value:
                out.append((ref, doc))
        return out


@dataclass(frozen=True)
class PatternSelection:
    pattern_kind: PatternKind
    target_service: str
    target_namespace: str
    parameters: PatternPolicy | SqlCacheParams
    variant: str = "http"  # cache-aside only: http | sql
    pattern_namespace: str = DEFAULT_PATTERN_NAMESPACE


@dataclass(frozen=True)
class GeneratedResource:
    kind: str
    name: str
    namespace: str
    document: dict

    @property
    def ref(self) -> ResourceRef:
        return ResourceRef(self.kind, self.namespace, self.name)


@dataclass(frozen=True)
class ServiceRename:
    """Rename (and possibly relocate) a Service, carrying the mutated doc."""

    old: ResourceRef
    new: ResourceRef
    document: dict


@dataclass
class InjectionPlan:
    selection: PatternSelection
    mutations: list[ServiceRename] = field(default_factory=list)
    creations: list[GeneratedResource] = field(default_factory=list)
    deletions: list[ResourceRef] = field(default_factory=list)

    @property
    def namespace_assignments(self) -> dict[ResourceRef, str]:
        return {c.ref: c.namespace for c in self.creations}


@dataclass(frozen=True)
class ResourceStatus:
    ref: ResourceRef
    status: str  # ready | pending | failed


@dataclass
class ReadinessReport:
    resources: list[ResourceStatus]
    overall: bool
    elapsed_ms: float

    @property
    def pending(self) -> list[ResourceRef]:
        return [r.ref for r in self.resources if r.status == "pending"]

    @property
    def failed(self) -> list[ResourceRef]:
        return [r.ref for r in self.resources if r.status == "failed"]
