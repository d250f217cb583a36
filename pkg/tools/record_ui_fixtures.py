"""Record control-service API responses as frontend contract fixtures.

Drives the HTTP API end to end (fake executor, canned Prometheus) and dumps
each response body under frontend/fixtures/. Rerun after API changes:

    python3 tools/record_ui_fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
import time
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from fastapi.testclient import TestClient  # noqa: E402

from prom_fixture import FakePrometheus, matrix_body  # noqa: E402
from snappattern.assets import sample_pipeline_text  # noqa: E402
from snappattern.control import ControlConfig, ControlService, FakeExecutor, create_app  # noqa: E402
from snappattern.fixture import data_product_app  # noqa: E402
from snappattern.httpkit import ServerHandle  # noqa: E402

FIXTURES = REPO / "frontend" / "fixtures"


def prom_responder(query, start, end, step):
    base = 5_000.0
    if "kepler" in query:
        namespace = query.split('container_namespace="')[1].split('"')[0]
        slope = 3.0 if namespace == "pipeline" else 1.0
        points = [(base + i * step, 100.0 + slope * i * step) for i in range(7)]
        return matrix_body([({"container_namespace": namespace,
                              "pod": f"{namespace}-pod-1"}, points)])
    return matrix_body([({}, [(base + i * step, 15.0 + i) for i in range(7)])])


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    recorded: dict[str, object] = {}

    with tempfile.TemporaryDirectory() as tmp, \
            FakePrometheus(prom_responder) as prom, \
            ServerHandle(data_product_app()) as data_server:
        service = ControlService(
            ControlConfig(data_dir=Path(tmp) / "data", prometheus_url=prom.url),
            executor=FakeExecutor(), readiness_poll_interval_ms=5)
        client = TestClient(create_app(service))

        recorded["cluster-create-response"] = client.post("/cluster", json={}).json()

        upload = client.post("/manifest-sets", content=sample_pipeline_text())
        recorded["manifest-set-response"] = upload.json()
        set_id = upload.json()["manifest_set_id"]
        client.post(f"/manifest-sets/{set_id}/deploy")

        recorded["services-response"] = client.get(
            "/services", params={"namespace": "pipeline"}).json()

        injection_request = {
            "manifest_set_id": set_id,
            "pattern": "circuit_breaker",
            "target_service": "filter-service",
            "target_namespace": "pipeline",
            "parameters": {
                "failure_threshold": 3,
                "open_duration_ms": 10000,
                "half_open_max_probes": 1,
                "retry": {"max_retries": 2, "backoff_base_ms": 100,
                          "backoff_multiplier": 2.0},
            },
        }
        recorded["injection-request"] = injection_request
        injection = client.post("/injections", json=injection_request)
        recorded["injection-response"] = injection.json()

        conflict = client.post("/injections", json=injection_request)
        recorded["error-already-injected"] = conflict.json()

        run = client.post("/runs", json={
            "profile": "custom", "step_users": 2, "duration_s": 1,
            "targets": [data_server.url],
            "request": {"method": "GET", "path": "/data"},
        })
        run_id = run.json()["run_id"]
        recorded["run-start-response"] = run.json()

        not_finished = client.get(f"/runs/{run_id}/metrics.csv")
        recorded["error-run-not-finished"] = not_finished.json()

        service.wait_for_run(run_id, timeout_s=60)
        recorded["run-record"] = client.get(f"/runs/{run_id}").json()
        recorded["series"] = client.get(f"/runs/{run_id}/series.json").json()

        # A richer series doc for dashboard grouping tests: two patterns
        # across the three workload levels, one namespace.
        synthetic = []
        for pattern in ("baseline", "circuit_breaker"):
            for workload in ("low", "medium", "high"):
                points = [[5000.0 + k * 10, 30.0 + (7.0 if pattern == "baseline" else 4.0) * k]
                          for k in range(6)]
                synthetic.append({"pattern": pattern, "workload": workload,
                                  "namespace": "pipeline", "points": points})
        recorded["series-six"] = synthetic

    for name, payload in recorded.items():
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
