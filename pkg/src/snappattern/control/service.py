"""Orchestration backend: cluster lifecycle, manifest sets, injections,
workload runs, and metrics artifacts. The HTTP API and the CLI both drive
this class; every state change is replay-safe at the record level."""

from __future__ import annotations

import json
import logging
import threading
import time
import uuid
from dataclasses import asdict
from pathlib import Path

from .. import assets
from ..injector import (
    ConflictError,
    ManifestParseError,
    NotFoundError,
    PatternKind,
    PatternSelection,
    SelectionInvalid,
    WorkloadManifestSet,
    apply_plan,
    check_readiness,
    parse_manifests,
    plan_injection,
    plan_removal,
    render_plan,
    validate_selection,
)
from ..injector.model import InjectorError
from ..injector.sqlcache import SqlCacheParams
from ..metrics import RunMeta, collect_run, export_csv, export_series
from ..metrics.export import write_series_json
from ..metrics.plots import render_energy_figures
from ..proxy.policies import PolicyError, build_policy, policy_params
from ..workload import (
    RequestTemplate,
    WorkloadProfile,
    named_profile,
    run_load,
    write_outcomes_csv,
)
from ..workload.profiles import STEP_USERS
from .config import ControlConfig
from .executor import ClusterExecutor, FakeExecutor, ShellExecutor
from .records import InjectionRecord, InjectionRegistry, RunRecord, RunRegistry

logger = logging.getLogger(__name__)

_KIND_BY_NAME = {kind.policy_name: kind for kind in PatternKind}
_KIND_BY_NAME.update({kind.name: kind for kind in PatternKind})  # CB, CA, ...


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details

    def body(self) -> dict:
        return {"code": self.code, "message": self.message,
                "details": self.details}


def selection_to_dict(selection: PatternSelection) -> dict:
    if isinstance(selection.parameters, SqlCacheParams):
        params = {
            "query_rules": [list(rule) for rule in selection.parameters.query_rules],
            "threads": selection.parameters.threads,
            "max_connections": selection.parameters.max_connections,
            "cache_size_mb": selection.parameters.cache_size_mb,
        }
    else:
        params = policy_params(selection.parameters)
    return {
        "pattern": selection.pattern_kind.policy_name,
        "variant": selection.variant,
        "target_service": selection.target_service,
        "target_namespace": selection.target_namespace,
        "pattern_namespace": selection.pattern_namespace,
        "parameters": params,
    }


def selection_from_dict(body: dict, default_target_ns: str,
                        default_pattern_ns: str) -> PatternSelection:
    pattern = str(body.get("pattern", ""))
    kind = _KIND_BY_NAME.get(pattern)
    if kind is None:
        raise ApiError(400, "UNKNOWN_PATTERN",
                       f"unknown pattern {pattern!r}; expected one of "
                       f"{sorted(k.policy_name for k in PatternKind)}")
    target = body.get("target_service")
    if not target:
        raise ApiError(400, "BAD_SELECTION", "target_service is required")
    variant = str(body.get("variant", "http"))
    params = body.get("parameters", {}) or {}
    try:
        if variant == "sql":
            parameters: SqlCacheParams | object = SqlCacheParams(
                query_rules=tuple((str(r), int(t)) for r, t in params.get("query_rules", [])),
                threads=int(params.get("threads", 4)),
                max_connections=int(params.get("max_connections", 2048)),
                cache_size_mb=int(params.get("cache_size_mb", 256)),
            )
        else:
            parameters = build_policy(kind.policy_name, params, env={})
    except (PolicyError, TypeError, ValueError) as exc:
        raise ApiError(400, "BAD_SELECTION", f"invalid parameters: {exc}") from exc
    return PatternSelection(
        pattern_kind=kind,
        target_service=str(target),
        target_namespace=str(body.get("target_namespace", default_target_ns)),
        parameters=parameters,  # type: ignore[arg-type]
        variant=variant,
        pattern_namespace=str(body.get("pattern_namespace", default_pattern_ns)),
    )


def _short_id() -> str:
    return uuid.uuid4().hex[:12]


class ControlService:
    def __init__(self, config: ControlConfig, executor: ClusterExecutor | None = None,
                 id_generator=_short_id, readiness_poll_interval_ms: int = 500):
        config.validate()
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        if executor is not None:
            self.executor = executor
        elif config.executor_mode == "fake":
            self.executor = FakeExecutor(
                state_path=Path(config.data_dir) / "fake-cluster.json")
        else:
            self.executor = ShellExecutor()
        self.runs = RunRegistry(self.data_dir)
        self.injections = InjectionRegistry(self.data_dir)
        self._id_generator = id_generator
        self._readiness_poll_interval_ms = readiness_poll_interval_ms
        self._cluster_lock = threading.Lock()
        self._manifest_dir = self.data_dir / "manifest-sets"
        self._manifest_dir.mkdir(parents=True, exist_ok=True)
        self._deployed_path = self.data_dir / "deployed.jsonl"
        self._run_threads: dict = {}

    # ----- cluster lifecycle -----

    def create_cluster(self, cpus: int | None = None,
                       memory_gb: int | None = None) -> dict:
        with self._cluster_lock:
            result = self.executor.create_cluster(cpus or self.config.cluster_cpus,
                                                  memory_gb or self.config.cluster_memory_gb)
            if not result.ok:
                raise ApiError(502, "EXECUTOR_FAILED",
                               "cluster creation failed", details=result.output)
            applied = []
            for name, text in assets.monitoring_assets():
                apply_result = self.executor.apply([text])
                if not apply_result.ok:
                    raise ApiError(502, "EXECUTOR_FAILED",
                                   f"monitoring asset {name} failed",
                                   details=apply_result.output)
                applied.append(name)
        return {"status": "created", "monitoring_assets": applied}

    def delete_cluster(self) -> dict:
        with self._cluster_lock:
            result = self.executor.delete_cluster()
            if not result.ok:
                raise ApiError(502, "EXECUTOR_FAILED",
                               "cluster deletion failed", details=result.output)
        return {"status": "deleted"}

    # ----- manifest sets -----

    def upload_manifests(self, text: str) -> dict:
        try:
            manifests = parse_manifests(text)
        except ManifestParseError as exc:
            raise ApiError(400, "MANIFEST_PARSE", str(exc)) from exc
        except ConflictError as exc:
            raise ApiError(409, "MANIFEST_CONFLICT", str(exc)) from exc
        set_id = self._id_generator()
        (self._manifest_dir / f"{set_id}.yaml").write_text(text, encoding="utf-8")
        services = sorted(
            {(ref.namespace, ref.name) for ref in manifests.index if ref.kind == "Service"})
        return {
            "manifest_set_id": set_id,
            "documents": len(manifests.documents),
            "services": [{"namespace": ns, "name": name} for ns, name in services],
            "warnings": manifests.warnings,
        }

    def _manifest_text(self, set_id: str) -> str:
        path = self._manifest_dir / f"{set_id}.yaml"
        if not path.exists():
            raise ApiError(404, "NOT_FOUND", f"manifest set {set_id} not found")
        return path.read_text(encoding="utf-8")

    def deploy_baseline(self, set_id: str) -> dict:
        text = self._manifest_text(set_id)
        manifests = parse_manifests(text)
        with self._cluster_lock:
            result = self.executor.apply([text])
        if not result.ok:
            raise ApiError(502, "EXECUTOR_FAILED", "baseline apply failed",
                           details=result.output)
        with open(self._deployed_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"manifest_set_id": set_id}) + "\n")
        return {"deployed": True, "documents": len(manifests.documents)}

    def _is_deployed(self, set_id: str) -> bool:
        if not self._deployed_path.exists():
            return False
        with open(self._deployed_path, encoding="utf-8") as fh:
            return any(json.loads(line)["manifest_set_id"] == set_id
                       for line in fh if line.strip())

    def list_services(self, namespace: str | None = None) -> list[dict]:
        try:
            services = self.executor.list_services(namespace)
        except Exception as exc:
            raise ApiError(502, "EXECUTOR_FAILED", str(exc)) from exc
        return [{"name": s.name, "namespace": s.namespace, "ports": list(s.ports)}
                for s in services]

    # ----- pattern injection -----

    def _rebuild_model(self, set_id: str) -> WorkloadManifestSet:
        model = parse_manifests(self._manifest_text(set_id))
        for record in self.injections.active():
            if record.manifest_set_id != set_id:
                continue
            selection = selection_from_dict(
                record.selection, self.config.namespaces.pipeline,
                self.config.namespaces.patterns)
            model = apply_plan(model, plan_injection(model, selection))
        return model

    def _execute_plan(self, plan) -> None:
        olds = list(plan.deletions) + [m.old for m in plan.mutations]
        with self._cluster_lock:
            if olds:
                result = self.executor.delete(olds)
                if not result.ok:
                    raise ApiError(502, "EXECUTOR_FAILED", "resource deletion failed",
                                   details=result.output)
            documents = render_plan(plan)
            if documents:
                result = self.executor.apply(documents)
                if not result.ok:
                    raise ApiError(502, "EXECUTOR_FAILED", "apply failed",
                                   details=result.output)

    def inject_pattern(self, body: dict) -> dict:
        set_id = str(body.get("manifest_set_id", ""))
        self._manifest_text(set_id)  # 404 when unknown
        if not self._is_deployed(set_id):
            raise ApiError(409, "NOT_DEPLOYED",
                           f"manifest set {set_id} has not been deployed")
        selection = selection_from_dict(body, self.config.namespaces.pipeline,
                                        self.config.namespaces.patterns)
        for record in self.injections.active():
            if (record.manifest_set_id == set_id
                    and record.selection["target_service"] == selection.target_service):
                raise ApiError(409, "ALREADY_INJECTED",
                               f"{selection.target_service} already has "
                               f"{record.selection['pattern']} applied",
                               details={"injection_id": record.injection_id})
        model = self._rebuild_model(set_id)
        issues = validate_selection(model, selection)
        if any(i.code == "TARGET_NOT_FOUND" for i in issues):
            raise ApiError(404, "TARGET_NOT_FOUND", issues[0].message)
        if issues:
            raise ApiError(400, "VALIDATION",
                           "selection failed validation",
                           details=[asdict(i) for i in issues])
        try:
            plan = plan_injection(model, selection)
        except ConflictError as exc:
            raise ApiError(409, "CONFLICT", str(exc)) from exc
        except (NotFoundError, SelectionInvalid, InjectorError) as exc:
            raise ApiError(400, "VALIDATION", str(exc)) from exc

        self._execute_plan(plan)
        report = check_readiness(
            self.executor, plan, timeout_ms=self.config.readiness_timeout_ms,
            poll_interval_ms=self._readiness_poll_interval_ms)
        injection_id = self._id_generator()
        self.injections.upsert(InjectionRecord(
            injection_id=injection_id,
            manifest_set_id=set_id,
            selection=selection_to_dict(selection),
            status="applied",
            ready=report.overall,
        ))
        readiness = {
            "overall": report.overall,
            "elapsed_ms": report.elapsed_ms,
            "resources": [{"kind": r.ref.kind, "namespace": r.ref.namespace,
                           "name": r.ref.name, "status": r.status}
                          for r in report.resources],
        }
        if not report.overall:
            raise ApiError(504, "READINESS_TIMEOUT",
                           "injected resources did not become ready",
                           details={"injection_id": injection_id,
                                    "readiness": readiness})
        return {"injection_id": injection_id, "readiness": readiness}

    def remove_pattern(self, injection_id: str) -> dict:
        record = self.injections.get(injection_id)
        if record is None:
            raise ApiError(404, "NOT_FOUND", f"injection {injection_id} not found")
        if record.status == "removed":
            return {"removed": True, "already_removed": True}
        model = self._rebuild_model(record.manifest_set_id)
        selection = selection_from_dict(
            record.selection, self.config.namespaces.pipeline,
            self.config.namespaces.patterns)
        plan = plan_removal(model, selection)
        self._execute_plan(plan)
        record.status = "removed"
        self.injections.upsert(record)
        return {"removed": True, "already_removed": False}

    def list_injections(self) -> list[dict]:
        return [asdict(r) for r in self.injections.list()]

    # ----- workload runs -----

    def _build_profile(self, body: dict) -> WorkloadProfile:
        targets = tuple(body.get("targets", ()))
        if not targets:
            raise ApiError(400, "BAD_PROFILE", "at least one target URL is required")
        request_body = body.get("request", {}) or {}
        template = RequestTemplate(
            method=str(request_body.get("method", "GET")),
            path=str(request_body.get("path", "/")),
            headers=tuple((str(k), str(v))
                          for k, v in (request_body.get("headers") or {}).items()),
            body=str(request_body.get("body", "")).encode("utf-8"),
        )
        name = str(body.get("profile", "low"))
        duration_s = int(body.get("duration_s", 90))
        step_interval_s = int(body.get("step_interval_s", 30))
        try:
            if name in STEP_USERS:
                return named_profile(name, duration_s=duration_s, targets=targets,
                                     request=template, step_interval_s=step_interval_s)
            return WorkloadProfile(
                name=name, step_users=int(body.get("step_users", 0)),
                step_interval_s=step_interval_s, duration_s=duration_s,
                targets=targets, request=template)
        except ValueError as exc:
            raise ApiError(400, "BAD_PROFILE", str(exc)) from exc

    def _active_pattern_label(self) -> str:
        active = self.injections.active()
        if len(active) == 1:
            return active[0].selection["pattern"]
        return "baseline"

    def start_workload(self, body: dict) -> dict:
        profile = self._build_profile(body)
        pattern = str(body.get("pattern") or self._active_pattern_label())
        run_id = self._id_generator()
        record = RunRecord(
            run_id=run_id, pattern=pattern,
            workload={
                "name": profile.name, "step_users": profile.step_users,
                "step_interval_s": profile.step_interval_s,
                "duration_s": profile.duration_s, "targets": list(profile.targets),
            })
        self.runs.upsert(record)

        def execute() -> None:
            record.status = "running"
            record.started_at = time.time()
            self.runs.upsert(record)
            try:
                outcomes = run_load(profile).wait()
                run_dir = self.runs.run_dir(run_id)
                outcomes_path = run_dir / "outcomes.csv"
                write_outcomes_csv(outcomes, outcomes_path)
                record.status = "done"
                record.ended_at = time.time()
                record.artifact_paths = {"outcomes_csv": str(outcomes_path)}
            except Exception as exc:
                logger.exception("workload run %s failed", run_id)
                record.status = "failed"
                record.ended_at = time.time()
                record.error = str(exc)
            self.runs.upsert(record)

        thread = threading.Thread(target=execute, daemon=True)
        self._run_threads[run_id] = thread
        thread.start()
        return {"run_id": run_id}

    def wait_for_run(self, run_id: str, timeout_s: float | None = None) -> None:
        thread = self._run_threads.get(run_id)
        if thread is not None:
            thread.join(timeout=timeout_s)

    def get_run(self, run_id: str) -> dict:
        record = self.runs.get(run_id)
        if record is None:
            raise ApiError(404, "NOT_FOUND", f"run {run_id} not found")
        return asdict(record)

    # ----- metrics artifacts -----

    def _collect_artifacts(self, record: RunRecord) -> tuple[Path, Path]:
        run_dir = self.runs.run_dir(record.run_id)
        csv_path = run_dir / "metrics.csv"
        series_path = run_dir / "series.json"
        if csv_path.exists() and series_path.exists():
            return csv_path, series_path
        meta = RunMeta(
            run_id=record.run_id, pattern=record.pattern,
            workload=record.workload.get("name", "custom"),
            start_s=record.started_at or 0.0,
            end_s=record.ended_at or 0.0,
        )
        namespaces = [self.config.namespaces.pipeline, self.config.namespaces.patterns]
        table = collect_run(meta, self.config.prometheus_url, namespaces,
                            latency_namespace=self.config.namespaces.pipeline)
        export_csv(table, csv_path)
        write_series_json(table, series_path)
        figures = render_energy_figures(export_series(table), run_dir)
        record.artifact_paths = {
            **record.artifact_paths,
            "metrics_csv": str(csv_path),
            "series_json": str(series_path),
            "figures": [str(p) for p in figures],
        }
        self.runs.upsert(record)
        return csv_path, series_path

    def _finished_record(self, run_id: str) -> RunRecord:
        record = self.runs.get(run_id)
        if record is None:
            raise ApiError(404, "NOT_FOUND", f"run {run_id} not found")
        if record.status in ("created", "running"):
            raise ApiError(409, "RUN_NOT_FINISHED",
                           f"run {run_id} is still {record.status}")
        if record.status == "failed":
            raise ApiError(409, "RUN_FAILED", record.error or "run failed")
        return record

    def get_metrics_csv(self, run_id: str) -> bytes:
        record = self._finished_record(run_id)
        csv_path, _series = self._collect_artifacts(record)
        return csv_path.read_bytes()

    def get_series_json(self, run_id: str) -> bytes:
        record = self._finished_record(run_id)
        _csv, series_path = self._collect_artifacts(record)
        return series_path.read_bytes()
