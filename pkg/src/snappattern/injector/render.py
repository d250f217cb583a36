"""Canonical, golden-file-stable rendering of manifest documents.

Keys are emitted in a fixed documented order (identity first, then spec
details, alphabetical within a rank), 2-space indentation, no anchors or
timestamps, so the same plan always renders to the same bytes.
"""

from __future__ import annotations

import yaml

from .model import GeneratedResource, InjectionPlan

# Lower rank renders earlier; unknown keys share rank 50 and sort by name.
_KEY_RANK = {
    "apiVersion": 0,
    "kind": 1,
    "metadata": 2,
    "name": 3,
    "namespace": 4,
    "labels": 5,
    "annotations": 6,
    "spec": 10,
    "replicas": 11,
    "selector": 12,
    "matchLabels": 13,
    "type": 14,
    "externalName": 15,
    "image": 16,
    "args": 17,
    "ports": 18,
    "template": 19,
    "containers": 20,
    "volumeMounts": 21,
    "rules": 23,
    "data": 30,
}


def canonicalize(value):
    if isinstance(value, dict):
        ordered = sorted(value.items(), key=lambda kv: (_KEY_RANK.get(kv[0], 50), kv[0]))
        return {k: canonicalize(v) for k, v in ordered}
    if isinstance(value, list):
        return [canonicalize(v) for v in value]
    return value


class _CanonicalDumper(yaml.SafeDumper):
    pass


def _str_representer(dumper: yaml.SafeDumper, value: str):
    if "\n" in value:
        return dumper.represent_scalar("tag:yaml.org,2002:str", value, style="|")
    return dumper.represent_scalar("tag:yaml.org,2002:str", value)


_CanonicalDumper.add_representer(str, _str_representer)


def render_document(doc: dict) -> str:
    return yaml.dump(canonicalize(doc), Dumper=_CanonicalDumper, sort_keys=False,
                     default_flow_style=False, indent=2, width=100)


def render_plan(plan: InjectionPlan) -> list[str]:
    """Render a plan's apply-able documents: mutations first, then creations
    sorted by (kind, name). Pure function; same plan, same bytes."""
    documents = [rename.document for rename in plan.mutations]
    documents.extend(
        c.document for c in sorted(plan.creations, key=lambda c: (c.kind, c.name))
    )
    return [render_document(doc) for doc in documents]


def render_stream(plan: InjectionPlan) -> str:
    rendered = render_plan(plan)
    return "---\n".join(rendered)


def format_body_size(max_body_bytes: int) -> str:
    """Ingress-style size literal: 1048576 -> "1m", 2048 -> "2k"."""
    if max_body_bytes % (1024 * 1024) == 0:
        return f"{max_body_bytes // (1024 * 1024)}m"
    if max_body_bytes % 1024 == 0:
        return f"{max_body_bytes // 1024}k"
    return str(max_body_bytes)


def build_ingress_document(name: str, namespace: str, labels: dict,
                           service_name: str, service_port: int,
                           rate_per_second: float, max_body_bytes: int) -> dict:
    rps = int(rate_per_second) if float(rate_per_second).is_integer() else rate_per_second
    return {
        "apiVersion": "networking.k8s.io/v1",
        "kind": "Ingress",
        "metadata": {
            "name": name,
            "namespace": namespace,
            "labels": dict(labels),
            # NGINX ingress controller annotation profile; other controllers
            # need their own key set.
            "annotations": {
                "nginx.ingress.kubernetes.io/limit-rps": str(rps),
                "nginx.ingress.kubernetes.io/proxy-body-size": format_body_size(max_body_bytes),
            },
        },
        "spec": {
            "rules": [{
                "http": {
                    "paths": [{
                        "path": "/",
                        "pathType": "Prefix",
                        "backend": {
                            "service": {
                                "name": service_name,
                                "port": {"number": service_port},
                            },
                        },
                    }],
                },
            }],
        },
    }


def render_ingress_offload(resource: GeneratedResource) -> str:
    """Render the gateway-offloading Ingress resource deterministically."""
    return render_document(resource.document)
