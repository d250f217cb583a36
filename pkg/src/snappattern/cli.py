"""Command-line interface.

Mirrors the control-service endpoints (cluster, manifests, services,
inject, remove, run, metrics) and exposes the standalone tools: the pattern
proxy, the load generator, the metrics collector (CSV + series + figures),
and the fixture pipeline services.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .control import ControlService, load_config
from .control.service import ApiError


def _parse_duration(text: str) -> int:
    text = text.strip().lower()
    if text.endswith("ms"):
        raise click.BadParameter("durations are whole seconds (e.g. 90s)")
    if text.endswith("s"):
        return int(text[:-1])
    if text.endswith("m"):
        return int(text[:-1]) * 60
    return int(text)


def _service(config_path: str | None) -> ControlService:
    return ControlService(load_config(config_path))


def _fail(exc: ApiError) -> None:
    click.echo(f"error [{exc.code}]: {exc.message}", err=True)
    if exc.details:
        click.echo(json.dumps(exc.details, indent=2, default=str), err=True)
    sys.exit(1)


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, default=str))


@click.group()
def main() -> None:
    """Inject cloud design patterns, drive workloads, collect energy metrics."""


# ----- pattern proxy -----


@main.group()
def proxy() -> None:
    """The pattern proxy runtime."""


@proxy.command("run")
@click.option("--config", "config_file", required=True, type=click.Path(exists=True),
              help="Policy document (YAML/JSON with a 'pattern' key).")
@click.option("--listen", default="127.0.0.1:8080", show_default=True)
@click.option("--upstream", required=True, help="Base URL of the renamed original service.")
def proxy_run(config_file: str, listen: str, upstream: str) -> None:
    """Run a reverse proxy applying one configured pattern."""
    from .proxy.server import config_from_file, run_proxy

    run_proxy(config_from_file(config_file, listen, upstream))


# ----- load generator -----


@main.group()
def load() -> None:
    """Closed-loop ramping load generator."""


@load.command("run")
@click.option("--profile", default="low", show_default=True,
              help="low | medium | high | custom")
@click.option("--duration", default="90s", show_default=True)
@click.option("--target", "targets", multiple=True, required=True)
@click.option("--out", "out_path", default="outcomes.csv", show_default=True)
@click.option("--step-users", type=int, default=None,
              help="Users added per step (custom profile).")
@click.option("--step-interval", default="30s", show_default=True)
@click.option("--method", default="GET", show_default=True)
@click.option("--path", default="/", show_default=True)
@click.option("--body", default="", help="Request body for each virtual user call.")
def load_run(profile, duration, targets, out_path, step_users, step_interval,
             method, path, body) -> None:
    """Drive the step-ramp workload and write the outcomes CSV."""
    from .workload import (
        RequestTemplate,
        WorkloadProfile,
        named_profile,
        run_load,
        summarize,
        write_outcomes_csv,
    )
    from .workload.profiles import STEP_USERS

    template = RequestTemplate(method=method, path=path, body=body.encode())
    duration_s = _parse_duration(duration)
    interval_s = _parse_duration(step_interval)
    if profile in STEP_USERS:
        wl = named_profile(profile, duration_s=duration_s, targets=targets,
                           request=template, step_interval_s=interval_s)
    else:
        if not step_users:
            raise click.BadParameter("--step-users is required for custom profiles")
        wl = WorkloadProfile(name=profile, step_users=step_users,
                             step_interval_s=interval_s, duration_s=duration_s,
                             targets=tuple(targets), request=template)
    click.echo(f"running {wl.name}: +{wl.step_users} users / {wl.step_interval_s}s "
               f"for {wl.duration_s}s against {len(targets)} target(s)")
    outcomes = run_load(wl).wait()
    write_outcomes_csv(outcomes, out_path)
    report = summarize(outcomes, wl)
    click.echo(f"wrote {len(outcomes)} outcomes to {out_path}")
    click.echo(f"total={report.total} errors={report.error_count} "
               f"rps={report.throughput_rps:.1f} p50={report.p50_latency_ms:.1f}ms "
               f"p95={report.p95_latency_ms:.1f}ms p99={report.p99_latency_ms:.1f}ms")


# ----- metrics collector -----


@main.group()
def metrics() -> None:
    """Energy/latency collection and export."""


@metrics.command("collect")
@click.option("--run", "run_id", required=True)
@click.option("--from", "start_s", required=True, type=float,
              help="Range start (unix seconds).")
@click.option("--to", "end_s", required=True, type=float,
              help="Range end (unix seconds).")
@click.option("--prom", "prom_url", required=True, help="Prometheus base URL.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--pattern", default="baseline", show_default=True)
@click.option("--workload", default="low", show_default=True)
@click.option("--namespace", "namespaces", multiple=True,
              default=("pipeline", "snappattern-patterns"), show_default=True)
@click.option("--window", default=10, show_default=True,
              help="Window width in seconds.")
def metrics_collect(run_id, start_s, end_s, prom_url, out_dir, pattern, workload,
                    namespaces, window) -> None:
    """Query Prometheus and write metrics.csv, series.json, and figures."""
    from .metrics import RunMeta, collect_run, export_csv, export_series, write_series_json
    from .metrics.plots import render_energy_figures

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = RunMeta(run_id=run_id, pattern=pattern, workload=workload,
                   start_s=start_s, end_s=end_s)
    table = collect_run(meta, prom_url, list(namespaces), window_seconds=window)
    csv_path = export_csv(table, out / "metrics.csv")
    series_path = write_series_json(table, out / "series.json")
    figures = render_energy_figures(export_series(table), out)
    for warning in table.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"wrote {csv_path}, {series_path}, {len(figures)} figure(s)")


@metrics.command("fetch")
@click.argument("run_id")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def metrics_fetch(run_id, out_dir, config_path) -> None:
    """Fetch a finished run's metrics artifacts from the control records."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    service = _service(config_path)
    try:
        (out / "metrics.csv").write_bytes(service.get_metrics_csv(run_id))
        (out / "series.json").write_bytes(service.get_series_json(run_id))
    except ApiError as exc:
        _fail(exc)
    click.echo(f"wrote {out / 'metrics.csv'} and {out / 'series.json'}")


# ----- control-service mirror -----


@main.group()
def cluster() -> None:
    """Cluster lifecycle."""


@cluster.command("up")
@click.option("--cpus", type=int, default=None)
@click.option("--memory-gb", type=int, default=None)
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def cluster_up(cpus, memory_gb, config_path) -> None:
    try:
        _echo_json(_service(config_path).create_cluster(cpus, memory_gb))
    except ApiError as exc:
        _fail(exc)


@cluster.command("down")
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def cluster_down(config_path) -> None:
    try:
        _echo_json(_service(config_path).delete_cluster())
    except ApiError as exc:
        _fail(exc)


@main.group()
def manifests() -> None:
    """Manifest set upload and deployment."""


@manifests.command("upload")
@click.argument("file", type=click.Path(exists=True))
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def manifests_upload(file, config_path) -> None:
    text = Path(file).read_text(encoding="utf-8")
    try:
        _echo_json(_service(config_path).upload_manifests(text))
    except ApiError as exc:
        _fail(exc)


@manifests.command("deploy")
@click.argument("set_id")
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def manifests_deploy(set_id, config_path) -> None:
    try:
        _echo_json(_service(config_path).deploy_baseline(set_id))
    except ApiError as exc:
        _fail(exc)


@main.command("services")
@click.option("--namespace", default=None)
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def services(namespace, config_path) -> None:
    """List services deployed on the cluster, filterable by namespace."""
    try:
        _echo_json(_service(config_path).list_services(namespace))
    except ApiError as exc:
        _fail(exc)


@main.command("inject")
@click.option("--manifest-set", "set_id", required=True)
@click.option("--pattern", required=True,
              help="circuit_breaker | cache_aside | request_collapsing | "
                   "gateway_offloading | async_request_reply")
@click.option("--target", "target_service", required=True)
@click.option("--target-namespace", default=None)
@click.option("--variant", default="http", show_default=True)
@click.option("--params", "params_json", default="{}",
              help="Pattern parameters as a JSON object.")
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def inject(set_id, pattern, target_service, target_namespace, variant,
           params_json, config_path) -> None:
    """Apply a pattern to a target service via the DNS swap."""
    body = {
        "manifest_set_id": set_id,
        "pattern": pattern,
        "target_service": target_service,
        "variant": variant,
        "parameters": json.loads(params_json),
    }
    if target_namespace:
        body["target_namespace"] = target_namespace
    try:
        _echo_json(_service(config_path).inject_pattern(body))
    except ApiError as exc:
        _fail(exc)


@main.command("remove")
@click.argument("injection_id")
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def remove(injection_id, config_path) -> None:
    """Remove a previously injected pattern."""
    try:
        _echo_json(_service(config_path).remove_pattern(injection_id))
    except ApiError as exc:
        _fail(exc)


@main.command("run")
@click.option("--profile", default="low", show_default=True)
@click.option("--duration", default="90s", show_default=True)
@click.option("--target", "targets", multiple=True, required=True)
@click.option("--method", default="GET", show_default=True)
@click.option("--path", default="/", show_default=True)
@click.option("--body", default="")
@click.option("--step-users", type=int, default=None)
@click.option("--wait/--no-wait", default=True, show_default=True)
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def run_cmd(profile, duration, targets, method, path, body, step_users, wait,
            config_path) -> None:
    """Start a recorded workload run through the control service."""
    service = _service(config_path)
    request_body = {
        "profile": profile,
        "duration_s": _parse_duration(duration),
        "targets": list(targets),
        "request": {"method": method, "path": path, "body": body},
    }
    if step_users:
        request_body["step_users"] = step_users
    try:
        run_id = service.start_workload(request_body)["run_id"]
        click.echo(f"run started: {run_id}")
        if wait:
            service.wait_for_run(run_id)
            _echo_json(service.get_run(run_id))
    except ApiError as exc:
        _fail(exc)


@main.command("status")
@click.argument("run_id")
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def status(run_id, config_path) -> None:
    """Show a run record."""
    try:
        _echo_json(_service(config_path).get_run(run_id))
    except ApiError as exc:
        _fail(exc)


# ----- fixture pipeline -----


@main.group()
def fixture() -> None:
    """Desk-scale pipeline fixture services."""


@fixture.command("run")
@click.option("--role", required=True,
              type=click.Choice(["data-product", "filter", "aggregate", "anonymize",
                                 "format", "coordinator"]))
@click.option("--listen", default="127.0.0.1:0", show_default=True)
@click.option("--data-url", default="http://127.0.0.1:8081",
              help="Data product URL (coordinator role).")
@click.option("--stage-url", "stage_urls", multiple=True,
              help="name=url stage routing (coordinator role).")
def fixture_run(role, listen, data_url, stage_urls) -> None:
    """Serve one fixture service until interrupted."""
    from .fixture import CoordinatorApp, data_product_app, stage_app
    from .httpkit import ServerHandle

    host, _, port = listen.rpartition(":")
    if role == "data-product":
        app = data_product_app()
    elif role == "coordinator":
        routing = dict(entry.split("=", 1) for entry in stage_urls)
        app = CoordinatorApp(data_url, routing)
    else:
        app = stage_app(role)
    server = ServerHandle(app, host=host or "127.0.0.1", port=int(port or 0))
    click.echo(f"{role} listening on {server.url}")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.close()


# ----- control API server -----


@main.command("serve")
@click.option("--listen", default="127.0.0.1:8000", show_default=True)
@click.option("--config", "config_path", default=None, envvar="SNAPPATTERN_CONFIG")
def serve(listen, config_path) -> None:
    """Serve the control-service HTTP API (consumed by the web UI)."""
    import uvicorn

    from .control.api import create_app

    host, _, port = listen.rpartition(":")
    uvicorn.run(create_app(_service(config_path)),
                host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":
    main()
