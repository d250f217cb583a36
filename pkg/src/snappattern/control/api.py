"""HTTP JSON API over the control service."""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .service import ApiError, ControlService


def create_app(service: ControlService) -> FastAPI:
    app = FastAPI(title="snappattern control service", version="0.1.0")

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    async def json_body(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except ValueError as exc:
            raise ApiError(400, "BAD_JSON", f"request body is not JSON: {exc}") from exc
        if not isinstance(body, dict):
            raise ApiError(400, "BAD_JSON", "request body must be a JSON object")
        return body

    @app.post("/cluster")
    async def create_cluster(request: Request):
        body = await json_body(request)
        return service.create_cluster(body.get("cpus"), body.get("memory_gb"))

    @app.delete("/cluster")
    async def delete_cluster():
        return service.delete_cluster()

    @app.post("/manifest-sets")
    async def upload_manifests(request: Request):
        raw = await request.body()
        return service.upload_manifests(raw.decode("utf-8"))

    @app.post("/manifest-sets/{set_id}/deploy")
    async def deploy_baseline(set_id: str):
        return service.deploy_baseline(set_id)

    @app.get("/services")
    async def list_services(namespace: str | None = None):
        return service.list_services(namespace)

    @app.post("/injections")
    async def inject_pattern(request: Request):
        return service.inject_pattern(await json_body(request))

    @app.get("/injections")
    async def list_injections():
        return service.list_injections()

    @app.delete("/injections/{injection_id}")
    async def remove_pattern(injection_id: str):
        return service.remove_pattern(injection_id)

    @app.post("/runs")
    async def start_workload(request: Request):
        return service.start_workload(await json_body(request))

    @app.get("/runs/{run_id}")
    async def get_run(run_id: str):
        return service.get_run(run_id)

    @app.get("/runs/{run_id}/metrics.csv")
    async def get_metrics_csv(run_id: str):
        return Response(content=service.get_metrics_csv(run_id), media_type="text/csv")

    @app.get("/runs/{run_id}/series.json")
    async def get_series_json(run_id: str):
        return Response(content=service.get_series_json(run_id),
                        media_type="application/json")

    return app
