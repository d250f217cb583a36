"""Parsing of multi-document Kubernetes manifest streams."""

from __future__ import annotations

import logging

import yaml

from .model import (
    INDEXED_KINDS,
    ConflictError,
    ManifestParseError,
    ResourceRef,
    WorkloadManifestSet,
)

logger = logging.getLogger(__name__)


def _selector_matches(selector: dict, labels: dict) -> bool:
    return all(labels.get(k) == v for k, v in selector.items())


def build_set(documents: list[dict]) -> WorkloadManifestSet:
    """Index an already-parsed document list (no selector warnings)."""
    result = WorkloadManifestSet()
    for i, doc in enumerate(documents):
        result.documents.append(doc)
        kind = str(doc.get("kind", ""))
        if kind in INDEXED_KINDS:
            ref = ResourceRef.for_document(doc)
            if ref in result.index:
                raise ConflictError(
                    f"duplicate {ref.kind} {ref.namespace}/{ref.name} at document {i}"
                )
            result.index[ref] = doc
    return result


def parse_manifests(text: str) -> WorkloadManifestSet:
    """Parse a ``---``-separated manifest stream into an indexed set.

    Unknown kinds pass through as opaque documents with a warning. A
    duplicate (kind, namespace, name) identity is a conflict.
    """
    result = WorkloadManifestSet()
    loader = yaml.safe_load_all(text)
    index = 0
    while True:
        try:
            doc = next(loader)
        except StopIteration:
            break
        except yaml.YAMLError as exc:
            line = None
            mark = getattr(exc, "problem_mark", None)
            if mark is not None:
                line = mark.line + 1
            raise ManifestParseError(f"invalid manifest syntax: {exc}", index, line) from exc
        if doc is None:
            continue
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ManifestParseError("manifest document must be a mapping with a 'kind'", index)
        result.documents.append(doc)
        kind = str(doc["kind"])
        if kind in INDEXED_KINDS:
            ref = ResourceRef.for_document(doc)
            if ref in result.index:
                raise ConflictError(
                    f"duplicate {ref.kind} {ref.namespace}/{ref.name} at document {index}"
                )
            result.index[ref] = doc
        else:
            warning = f"kind {kind!r} is not transformed; passing through verbatim"
            result.warnings.append(warning)
            logger.warning(warning)
        index += 1

    _warn_on_selectorless_services(result)
    return result


def _warn_on_selectorless_services(result: WorkloadManifestSet) -> None:
    pod_labels = []
    for doc in result.deployments():
        template_meta = ((doc.get("spec", {}) or {}).get("template", {}) or {}).get("metadata", {}) or {}
        pod_labels.append((ResourceRef.for_document(doc).namespace,
                           template_meta.get("labels", {}) or {}))
    for svc in result.services():
        ref = ResourceRef.for_document(svc)
        selector = (svc.get("spec", {}) or {}).get("selector")
        if not selector:
            continue  # selectorless Services (ExternalName etc.) are legitimate
        if not any(ns == ref.namespace and _selector_matches(selector, labels)
                   for ns, labels in pod_labels):
            warning = (f"Service {ref.namespace}/{ref.name} selector {selector} "
                       f"matches no Deployment in the set")
            result.warnings.append(warning)
            logger.warning(warning)
