"""Cluster executor contract plus its two implementations.

The shell adapter drives the local minikube/kubectl toolchain and never
interprets manifests itself; the fake records the exact command plan and
answers listings and statuses from scripts, which is what every test runs
against.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from typing import Protocol

import yaml

from ..injector.model import ResourceRef


@dataclass(frozen=True)
class ExecutorResult:
    ok: bool
    output: str = ""


@dataclass(frozen=True)
class ServiceInfo:
    name: str
    namespace: str
    ports: tuple[int, ...] = ()


class ClusterExecutor(Protocol):
    def create_cluster(self, cpus: int, memory_gb: int) -> ExecutorResult: ...

    def delete_cluster(self) -> ExecutorResult: ...

    def apply(self, documents: list[str]) -> ExecutorResult: ...

    def delete(self, resources: list[ResourceRef]) -> ExecutorResult: ...

    def list_services(self, namespace: str | None = None) -> list[ServiceInfo]: ...

    def resource_status(self, ref: ResourceRef) -> str: ...


class FakeExecutor:
    """Scripted executor: records every call, tracks applied Services.

    ``ready_after_polls`` delays resource_status answers; ``fail_ops``
    forces named operations to fail; ``fail_resources`` marks refs failed.
    With ``state_path`` set, the simulated cluster state survives across
    processes, which keeps consecutive CLI invocations consistent.
    """

    def __init__(self, ready_after_polls: int = 0,
                 fail_ops: set | None = None,
                 fail_resources: set | None = None,
                 state_path=None):
        self.transcript: list[tuple] = []
        self.ready_after_polls = ready_after_polls
        self.fail_ops = fail_ops or set()
        self.fail_resources = fail_resources or set()
        self.cluster_up = False
        self.services: dict = {}  # (namespace, name) -> ServiceInfo
        self._status_polls: dict = {}
        self._state_path = state_path
        self._load_state()

    def _load_state(self) -> None:
        if self._state_path is None:
            return
        try:
            raw = json.loads(self._state_path.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            return
        self.cluster_up = raw.get("cluster_up", False)
        for entry in raw.get("services", []):
            info = ServiceInfo(name=entry["name"], namespace=entry["namespace"],
                               ports=tuple(entry["ports"]))
            self.services[(info.namespace, info.name)] = info

    def _save_state(self) -> None:
        if self._state_path is None:
            return
        payload = {
            "cluster_up": self.cluster_up,
            "services": [{"name": s.name, "namespace": s.namespace,
                          "ports": list(s.ports)} for s in self.services.values()],
        }
        self._state_path.parent.mkdir(parents=True, exist_ok=True)
        self._state_path.write_text(json.dumps(payload, sort_keys=True),
                                    encoding="utf-8")

    def _result(self, op: str) -> ExecutorResult:
        if op in self.fail_ops:
            return ExecutorResult(ok=False, output=f"scripted failure: {op}")
        return ExecutorResult(ok=True)

    def create_cluster(self, cpus: int, memory_gb: int) -> ExecutorResult:
        self.transcript.append(("create_cluster", cpus, memory_gb))
        result = self._result("create_cluster")
        self.cluster_up = result.ok
        self._save_state()
        return result

    def delete_cluster(self) -> ExecutorResult:
        self.transcript.append(("delete_cluster",))
        self.cluster_up = False
        self.services.clear()
        self._save_state()
        return self._result("delete_cluster")

    def apply(self, documents: list[str]) -> ExecutorResult:
        self.transcript.append(("apply", tuple(documents)))
        result = self._result("apply")
        if result.ok:
            for text in documents:
                for doc in yaml.safe_load_all(text):
                    if isinstance(doc, dict) and doc.get("kind") == "Service":
                        ref = ResourceRef.for_document(doc)
                        ports = tuple(
                            p.get("port") for p in
                            (doc.get("spec", {}) or {}).get("ports", []) or []
                            if isinstance(p.get("port"), int))
                        self.services[(ref.namespace, ref.name)] = ServiceInfo(
                            name=ref.name, namespace=ref.namespace, ports=ports)
            self._save_state()
        return result

    def delete(self, resources: list[ResourceRef]) -> ExecutorResult:
        self.transcript.append(("delete", tuple(resources)))
        result = self._result("delete")
        if result.ok:
            for ref in resources:
                if ref.kind == "Service":
                    self.services.pop((ref.namespace, ref.name), None)
            self._save_state()
        return result

    def list_services(self, namespace: str | None = None) -> list[ServiceInfo]:
        self.transcript.append(("list_services", namespace))
        return sorted(
            (info for (ns, _name), info in self.services.items()
             if namespace is None or ns == namespace),
            key=lambda s: (s.namespace, s.name))

    def resource_status(self, ref: ResourceRef) -> str:
        if ref in self.fail_resources:
            return "failed"
        polls = self._status_polls.get(ref, 0)
        self._status_polls[ref] = polls + 1
        return "ready" if polls >= self.ready_after_polls else "pending"


class ShellExecutor:
    """Thin adapter over minikube and kubectl; commands via injected runner."""

    def __init__(self, runner=None, minikube: str = "minikube", kubectl: str = "kubectl"):
        self._run = runner or self._subprocess_runner
        self._minikube = minikube
        self._kubectl = kubectl

    @staticmethod
    def _subprocess_runner(cmd: list[str], stdin_text: str | None = None):
        completed = subprocess.run(cmd, input=stdin_text, text=True,
                                   capture_output=True, check=False)
        return completed.returncode, completed.stdout + completed.stderr

    def _exec(self, cmd: list[str], stdin_text: str | None = None) -> ExecutorResult:
        code, output = self._run(cmd, stdin_text)
        return ExecutorResult(ok=code == 0, output=output)

    def create_cluster(self, cpus: int, memory_gb: int) -> ExecutorResult:
        return self._exec([self._minikube, "start", f"--cpus={cpus}",
                           f"--memory={memory_gb}g"])

    def delete_cluster(self) -> ExecutorResult:
        return self._exec([self._minikube, "delete"])

    def apply(self, documents: list[str]) -> ExecutorResult:
        return self._exec([self._kubectl, "apply", "-f", "-"],
                          stdin_text="---\n".join(documents))

    def delete(self, resources: list[ResourceRef]) -> ExecutorResult:
        for ref in resources:
            result = self._exec([self._kubectl, "delete", ref.kind.lower(), ref.name,
                                 "-n", ref.namespace, "--ignore-not-found"])
            if not result.ok:
                return result
        return ExecutorResult(ok=True)

    def list_services(self, namespace: str | None = None) -> list[ServiceInfo]:
        cmd = [self._kubectl, "get", "services", "-o", "json"]
        cmd += ["-n", namespace] if namespace else ["--all-namespaces"]
        result = self._exec(cmd)
        if not result.ok:
            raise RuntimeError(f"kubectl get services failed: {result.output}")
        items = json.loads(result.output).get("items", [])
        services = []
        for item in items:
            meta = item.get("metadata", {})
            ports = tuple(p.get("port") for p in
                          item.get("spec", {}).get("ports", [])
                          if isinstance(p.get("port"), int))
            services.append(ServiceInfo(name=meta.get("name", ""),
                                        namespace=meta.get("namespace", "default"),
                                        ports=ports))
        return services

    def resource_status(self, ref: ResourceRef) -> str:
        result = self._exec([self._kubectl, "get", ref.kind.lower(), ref.name,
                             "-n", ref.namespace, "-o", "json"])
        if not result.ok:
            return "pending"
        if ref.kind != "Deployment":
            return "ready"
        status = json.loads(result.output).get("status", {})
        return "ready" if status.get("readyReplicas", 0) >= 1 else "pending"
