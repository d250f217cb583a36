from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from snappattern.assets import sample_pipeline_text
from snappattern.control import ControlConfig, ControlService, FakeExecutor, create_app
from snappattern.fixture import data_product_app
from snappattern.httpkit import ServerHandle


@pytest.fixture
def client(tmp_path):
    config = ControlConfig(data_dir=tmp_path / "data")
    service = ControlService(config, executor=FakeExecutor(),
                             readiness_poll_interval_ms=5)
    with TestClient(create_app(service)) as test_client:
        test_client.service = service
        yield test_client


def upload(client) -> str:
    response = client.post("/manifest-sets", content=sample_pipeline_text())
    assert response.status_code == 200
    return response.json()["manifest_set_id"]


def test_cluster_endpoints(client):
    created = client.post("/cluster", json={})
    assert created.status_code == 200
    assert created.json()["status"] == "created"
    deleted = client.delete("/cluster")
    assert deleted.json()["status"] == "deleted"


def test_manifest_upload_and_deploy_flow(client):
    set_id = upload(client)
    deployed = client.post(f"/manifest-sets/{set_id}/deploy")
    assert deployed.status_code == 200
    assert deployed.json() == {"deployed": True, "documents": 12}


def test_manifest_parse_error_shape(client):
    response = client.post("/manifest-sets", content="kind: [broken")
    assert response.status_code == 400
    body = response.json()
    assert body["code"] == "MANIFEST_PARSE"
    assert "message" in body


def test_services_endpoint_with_namespace_filter(client):
    set_id = upload(client)
    client.post(f"/manifest-sets/{set_id}/deploy")
    everything = client.get("/services").json()
    pipeline_only = client.get("/services", params={"namespace": "pipeline"}).json()
    assert len(pipeline_only) == 6
    assert len(everything) >= 6


def test_injection_lifecycle_over_http(client):
    set_id = upload(client)
    client.post(f"/manifest-sets/{set_id}/deploy")
    injected = client.post("/injections", json={
        "manifest_set_id": set_id,
        "pattern": "circuit_breaker",
        "target_service": "filter-service",
        "parameters": {"failure_threshold": 3},
    })
    assert injected.status_code == 200
    injection_id = injected.json()["injection_id"]
    assert injected.json()["readiness"]["overall"] is True

    conflict = client.post("/injections", json={
        "manifest_set_id": set_id,
        "pattern": "cache_aside",
        "target_service": "filter-service",
    })
    assert conflict.status_code == 409
    assert conflict.json()["code"] == "ALREADY_INJECTED"

    removed = client.delete(f"/injections/{injection_id}")
    assert removed.status_code == 200
    assert removed.json()["removed"] is True

    listing = client.get("/injections").json()
    assert [r["status"] for r in listing] == ["removed"]


def test_run_endpoints(client):
    with ServerHandle(data_product_app()) as data_server:
        started = client.post("/runs", json={
            "profile": "custom", "step_users": 1, "duration_s": 1,
            "targets": [data_server.url],
            "request": {"method": "GET", "path": "/data"},
        })
        assert started.status_code == 200
        run_id = started.json()["run_id"]
        client.service.wait_for_run(run_id, timeout_s=30)

        record = client.get(f"/runs/{run_id}")
        assert record.status_code == 200
        assert record.json()["status"] == "done"

    missing = client.get("/runs/ghost")
    assert missing.status_code == 404
    assert missing.json()["code"] == "NOT_FOUND"


def test_metrics_endpoints_before_done_conflict(client):
    with ServerHandle(data_product_app()) as data_server:
        run_id = client.post("/runs", json={
            "profile": "custom", "step_users": 1, "duration_s": 2,
            "targets": [data_server.url],
            "request": {"method": "GET", "path": "/data"},
        }).json()["run_id"]
        conflict = client.get(f"/runs/{run_id}/metrics.csv")
        assert conflict.status_code == 409
        assert conflict.json()["code"] == "RUN_NOT_FINISHED"
        client.service.wait_for_run(run_id, timeout_s=30)


def test_bad_profile_rejected(client):
    response = client.post("/runs", json={"profile": "low", "targets": []})
    assert response.status_code == 400
    assert response.json()["code"] == "BAD_PROFILE"
