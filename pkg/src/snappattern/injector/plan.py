"""DNS-swap planning: interpose the pattern proxy without touching services.

The swap renames the target Service to ``<name>-original`` and relocates it
into the pattern namespace, where the proxy resolves it by bare name. A new
Service bearing the original name is created in the target namespace and
routes callers to the proxy Deployment. Pipeline callers keep resolving the
exact same names before and after injection.

Workload resources (the proxy Deployment) and its ConfigMap always live in
the pattern namespace so namespace-level energy attribution separates
pattern overhead from the baseline pipeline.
"""

from __future__ import annotations

import copy
import json
import re

from ..proxy.policies import (
    CacheAsidePolicy,
    CircuitBreakerPolicy,
    CollapsePolicy,
    GatewayOffloadPolicy,
    PatternPolicy,
    PolicyError,
    dump_policy_document,
)
from .model import (
    LABEL_PATTERN,
    LABEL_TARGET,
    ConflictError,
    GeneratedResource,
    InjectionPlan,
    NotFoundError,
    NotInjectedError,
    PatternKind,
    PatternSelection,
    ResourceRef,
    SelectionInvalid,
    ServiceRename,
    ValidationIssue,
    WorkloadManifestSet,
)
from .render import build_ingress_document
from .sqlcache import SqlCacheParams, SqlRuleError, render_sql_cache_config

PROXY_IMAGE = "ghcr.io/snappattern/pattern-proxy:0.1.0"
SQL_PROXY_IMAGE = "proxysql/proxysql:2.5.5"
HTTP_PROXY_PORT = 8080
SQL_PROXY_PORT = 6033

_DNS_LABEL = re.compile(r"^[a-z0-9]([-a-z0-9]{0,61}[a-z0-9])?$")

_POLICY_TYPES = {
    PatternKind.CB: CircuitBreakerPolicy,
    PatternKind.CA: CacheAsidePolicy,
    PatternKind.RC: CollapsePolicy,
    PatternKind.GO: GatewayOffloadPolicy,
}


def _kind_slug(selection: PatternSelection) -> str:
    return selection.pattern_kind.policy_name.replace("_", "-")


def _labels(selection: PatternSelection) -> dict:
    return {
        LABEL_PATTERN: selection.pattern_kind.policy_name,
        LABEL_TARGET: selection.target_service,
    }


def _service_ports(service_doc: dict) -> list[dict]:
    return (service_doc.get("spec", {}) or {}).get("ports", []) or []


def validate_selection(manifests: WorkloadManifestSet,
                       selection: PatternSelection) -> list[ValidationIssue]:
    """Check a selection against the manifest set; empty list means ok.

    Which pattern may target which service is deliberately unconstrained;
    the conventional pattern-to-service mapping is usage guidance, not a
    rule.
    """
    issues: list[ValidationIssue] = []
    for ns_name, value in (("target_namespace", selection.target_namespace),
                           ("pattern_namespace", selection.pattern_namespace)):
        if not _DNS_LABEL.match(value or ""):
            issues.append(ValidationIssue(
                "NAMESPACE_INVALID", f"{ns_name} {value!r} is not a valid namespace name"))

    target = manifests.get("Service", selection.target_namespace, selection.target_service)
    if target is None:
        issues.append(ValidationIssue(
            "TARGET_NOT_FOUND",
            f"Service {selection.target_namespace}/{selection.target_service} "
            f"not present in the manifest set"))
    elif not any(isinstance(p.get("port"), int) for p in _service_ports(target)):
        issues.append(ValidationIssue(
            "PORT_UNRESOLVED",
            f"Service {selection.target_service} declares no numeric port"))

    if selection.variant not in ("http", "sql"):
        issues.append(ValidationIssue(
            "VARIANT_INVALID", f"unknown variant {selection.variant!r}"))
    if selection.variant == "sql" and selection.pattern_kind is not PatternKind.CA:
        issues.append(ValidationIssue(
            "VARIANT_INVALID", "the sql variant applies to cache_aside only"))

    if selection.variant == "sql":
        if not isinstance(selection.parameters, SqlCacheParams):
            issues.append(ValidationIssue(
                "PARAM_TYPE", "sql variant requires SQL cache parameters"))
        else:
            try:
                selection.parameters.validate()
            except SqlRuleError as exc:
                issues.append(ValidationIssue("PARAM_REGEX", str(exc)))
            except ValueError as exc:
                issues.append(ValidationIssue("PARAM_RANGE", str(exc)))
    else:
        expected = _POLICY_TYPES.get(selection.pattern_kind)
        if expected is None:  # ARR
            from ..proxy.policies import AsyncReplyPolicy

            expected = AsyncReplyPolicy
        if not isinstance(selection.parameters, expected):
            issues.append(ValidationIssue(
                "PARAM_TYPE",
                f"{selection.pattern_kind.policy_name} requires "
                f"{expected.__name__} parameters"))
        else:
            try:
                selection.parameters.validate()
            except PolicyError as exc:
                issues.append(ValidationIssue("PARAM_RANGE", str(exc)))
    return issues


def _proxy_deployment(selection: PatternSelection, proxy_name: str,
                      config_name: str, upstream_url: str) -> dict:
    sql = selection.variant == "sql"
    container: dict = {
        "name": "pattern-proxy",
        "image": SQL_PROXY_IMAGE if sql else PROXY_IMAGE,
        "ports": [{"containerPort": SQL_PROXY_PORT if sql else HTTP_PROXY_PORT}],
        "volumeMounts": [{
            "name": "policy",
            "mountPath": "/etc/proxysql.cnf" if sql else "/etc/snappattern",
            **({"subPath": "proxysql.cnf"} if sql else {}),
        }],
    }
    if not sql:
        container["args"] = [
            "proxy", "run",
            "--config", "/etc/snappattern/policy.yaml",
            "--listen", f"0.0.0.0:{HTTP_PROXY_PORT}",
            "--upstream", upstream_url,
        ]
    return {
        "apiVersion": "apps/v1",
        "kind": "Deployment",
        "metadata": {
            "name": proxy_name,
            "namespace": selection.pattern_namespace,
            "labels": _labels(selection),
        },
        "spec": {
            "replicas": 1,
            "selector": {"matchLabels": {"app": proxy_name}},
            "template": {
                "metadata": {"labels": {"app": proxy_name, **_labels(selection)}},
                "spec": {
                    "containers": [container],
                    "volumes": [{
                        "name": "policy",
                        "configMap": {"name": config_name},
                    }],
                },
            },
        },
    }


def _policy_configmap(selection: PatternSelection, config_name: str,
                      upstream_host: str, upstream_port: int,
                      upstream_url: str) -> dict:
    if selection.variant == "sql":
        assert isinstance(selection.parameters, SqlCacheParams)
        data = {"proxysql.cnf": render_sql_cache_config(
            selection.parameters, upstream_host, upstream_port=3306)}
    else:
        data = {"policy.yaml": dump_policy_document(
            selection.parameters, upstream=upstream_url)}  # type: ignore[arg-type]
    return {
        "apiVersion": "v1",
        "kind": "ConfigMap",
        "metadata": {
            "name": config_name,
            "namespace": selection.pattern_namespace,
            "labels": _labels(selection),
        },
        "data": data,
    }


def _name_bearing_service(selection: PatternSelection, proxy_name: str,
                          original_ports: list[dict]) -> dict:
    sql = selection.variant == "sql"
    target_port = SQL_PROXY_PORT if sql else HTTP_PROXY_PORT
    ports = []
    for p in original_ports:
        entry = {"port": p.get("port"), "targetPort": target_port}
        if "name" in p:
            entry["name"] = p["name"]
        ports.append(entry)
    return {
        "apiVersion": "v1",
        "kind": "Service",
        "metadata": {
            "name": selection.target_service,
            "namespace": selection.target_namespace,
            "labels": _labels(selection),
        },
        "spec": {
            "selector": {"app": proxy_name},
            "ports": ports,
        },
    }


def plan_injection(manifests: WorkloadManifestSet,
                   selection: PatternSelection) -> InjectionPlan:
    """Produce the DNS-swap plan applying one pattern to one target service."""
    issues = validate_selection(manifests, selection)
    if any(i.code == "TARGET_NOT_FOUND" for i in issues):
        raise NotFoundError(
            f"Service {selection.target_namespace}/{selection.target_service} not found")
    if issues:
        raise SelectionInvalid(issues)

    original_name = selection.target_service
    renamed = f"{original_name}-original"
    for ref in manifests.index:
        if ref.kind == "Service" and ref.name == renamed:
            raise ConflictError(f"Service name {renamed} already taken in {ref.namespace}")

    target_ref = ResourceRef("Service", selection.target_namespace, original_name)
    original_doc = manifests.index[target_ref]
    original_ports = _service_ports(original_doc)
    upstream_port = next(p["port"] for p in original_ports if isinstance(p.get("port"), int))

    renamed_doc = copy.deepcopy(original_doc)
    renamed_doc.setdefault("metadata", {})
    renamed_doc["metadata"]["name"] = renamed
    renamed_doc["metadata"]["namespace"] = selection.pattern_namespace

    slug = _kind_slug(selection)
    proxy_name = f"{original_name}-{slug}-proxy"
    config_name = f"{original_name}-{slug}-policy"
    upstream_url = f"http://{renamed}:{upstream_port}"

    creations = [
        GeneratedResource("Deployment", proxy_name, selection.pattern_namespace,
                          _proxy_deployment(selection, proxy_name, config_name,
                                            upstream_url)),
        GeneratedResource("ConfigMap", config_name, selection.pattern_namespace,
                          _policy_configmap(selection, config_name, renamed,
                                            upstream_port, upstream_url)),
        GeneratedResource("Service", original_name, selection.target_namespace,
                          _name_bearing_service(selection, proxy_name, original_ports)),
    ]
    if selection.pattern_kind is PatternKind.GO:
        assert isinstance(selection.parameters, GatewayOffloadPolicy)
        ingress_name = f"{original_name}-{slug}-ingress"
        creations.append(GeneratedResource(
            "Ingress", ingress_name, selection.target_namespace,
            build_ingress_document(
                ingress_name, selection.target_namespace, _labels(selection),
                service_name=original_name,
                service_port=upstream_port,
                rate_per_second=selection.parameters.rate_per_second,
                max_body_bytes=selection.parameters.max_body_bytes,
            )))

    return InjectionPlan(
        selection=selection,
        mutations=[ServiceRename(
            old=target_ref,
            new=ResourceRef("Service", selection.pattern_namespace, renamed),
            document=renamed_doc,
        )],
        creations=creations,
    )


def plan_removal(manifests_with_pattern: WorkloadManifestSet,
                 selection: PatternSelection) -> InjectionPlan:
    """Invert a previous injection: delete labelled resources, rename back.

    Discovery relies on the ``snappattern/target`` label alone.
    """
    labelled = manifests_with_pattern.labelled(LABEL_TARGET, selection.target_service)
    if not labelled:
        raise NotInjectedError(
            f"no resources labelled {LABEL_TARGET}={selection.target_service}")

    renamed = f"{selection.target_service}-original"
    renamed_ref = next(
        (ref for ref in manifests_with_pattern.index
         if ref.kind == "Service" and ref.name == renamed), None)
    if renamed_ref is None:
        raise NotInjectedError(f"renamed Service {renamed} not found")

    restored = copy.deepcopy(manifests_with_pattern.index[renamed_ref])
    restored.setdefault("metadata", {})
    restored["metadata"]["name"] = selection.target_service
    restored["metadata"]["namespace"] = selection.target_namespace

    return InjectionPlan(
        selection=selection,
        mutations=[ServiceRename(
            old=renamed_ref,
            new=ResourceRef("Service", selection.target_namespace,
                            selection.target_service),
            document=restored,
        )],
        deletions=sorted((ref for ref, _doc in labelled),
                         key=lambda r: (r.kind, r.namespace, r.name)),
    )


def apply_plan(manifests: WorkloadManifestSet, plan: InjectionPlan) -> WorkloadManifestSet:
    """Apply a plan to the manifest model, returning a new set.

    Deletions land first, then renames, then creations, mirroring what an
    executor would do against a live cluster.
    """
    from .parse import build_set

    removed = set(plan.deletions) | {m.old for m in plan.mutations}
    documents: list[dict] = []
    for doc in manifests.documents:
        ref = ResourceRef.for_document(doc)
        if ref in removed:
            continue
        documents.append(copy.deepcopy(doc))
    for mutation in plan.mutations:
        documents.append(copy.deepcopy(mutation.document))
    for creation in plan.creations:
        documents.append(copy.deepcopy(creation.document))
    return build_set(documents)


def semantic_model(manifests: WorkloadManifestSet) -> frozenset:
    """Order-independent identity+content view used for round-trip checks."""
    items = []
    for doc in manifests.documents:
        ref = ResourceRef.for_document(doc)
        content = {k: v for k, v in doc.items() if k != "metadata"}
        meta = {k: v for k, v in (doc.get("metadata", {}) or {}).items()
                if k not in ("name", "namespace")}
        items.append((ref.kind, ref.namespace, ref.name,
                      json.dumps({"metadata": meta, **content}, sort_keys=True)))
    return frozenset(items)
