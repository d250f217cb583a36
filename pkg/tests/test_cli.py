from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from snappattern.assets import sample_pipeline_text
from snappattern.cli import main
from snappattern.fixture import data_product_app
from snappattern.httpkit import ServerHandle


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(f"""\
data_dir: {tmp_path / 'data'}
executor: fake
prometheus_url: http://127.0.0.1:9
namespaces:
  pipeline: pipeline
  patterns: snappattern-patterns
  monitoring: monitoring
""")
    return str(path)


def test_cluster_up_and_down(runner, config_file):
    up = runner.invoke(main, ["cluster", "up", "--config", config_file])
    assert up.exit_code == 0, up.output
    assert json.loads(up.output)["status"] == "created"
    down = runner.invoke(main, ["cluster", "down", "--config", config_file])
    assert json.loads(down.output)["status"] == "deleted"


def test_manifest_inject_remove_flow(runner, config_file, tmp_path):
    manifest_file = tmp_path / "pipeline.yaml"
    manifest_file.write_text(sample_pipeline_text())

    uploaded = runner.invoke(main, ["manifests", "upload", str(manifest_file),
                                    "--config", config_file])
    assert uploaded.exit_code == 0, uploaded.output
    set_id = json.loads(uploaded.output)["manifest_set_id"]

    deployed = runner.invoke(main, ["manifests", "deploy", set_id,
                                    "--config", config_file])
    assert deployed.exit_code == 0

    injected = runner.invoke(main, [
        "inject", "--manifest-set", set_id, "--pattern", "circuit_breaker",
        "--target", "filter-service", "--params", '{"failure_threshold": 4}',
        "--config", config_file])
    assert injected.exit_code == 0, injected.output
    injection_id = json.loads(injected.output)["injection_id"]

    listing = runner.invoke(main, ["services", "--namespace", "snappattern-patterns",
                                   "--config", config_file])
    assert "filter-service-original" in listing.output

    removed = runner.invoke(main, ["remove", injection_id, "--config", config_file])
    assert removed.exit_code == 0
    assert json.loads(removed.output)["removed"] is True


def test_load_run_writes_outcomes(runner, tmp_path):
    out_path = tmp_path / "outcomes.csv"
    with ServerHandle(data_product_app()) as server:
        result = runner.invoke(main, [
            "load", "run", "--profile", "custom", "--step-users", "2",
            "--duration", "1s", "--target", server.url,
            "--path", "/data", "--out", str(out_path)])
    assert result.exit_code == 0, result.output
    assert out_path.exists()
    lines = out_path.read_text().splitlines()
    assert lines[0] == "started_at_unix_ms,target,status,latency_ms,bytes"
    assert len(lines) > 1


def test_run_through_control_service(runner, config_file):
    with ServerHandle(data_product_app()) as server:
        result = runner.invoke(main, [
            "run", "--profile", "custom", "--step-users", "1", "--duration", "1s",
            "--target", server.url, "--path", "/data", "--config", config_file])
    assert result.exit_code == 0, result.output
    record = json.loads(result.output.split("\n", 1)[1])
    assert record["status"] == "done"


def test_error_exit_code_and_message(runner, config_file):
    result = runner.invoke(main, ["status", "ghost-run", "--config", config_file])
    assert result.exit_code == 1
    assert "NOT_FOUND" in result.output


def test_help_lists_command_surface(runner):
    result = runner.invoke(main, ["--help"])
    for command in ("proxy", "load", "metrics", "cluster", "manifests", "services",
                    "inject", "remove", "run", "serve", "fixture"):
        assert command in result.output
