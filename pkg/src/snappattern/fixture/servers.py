"""HTTP wiring for the fixture pipeline.

Every stage is one small server with a single POST endpoint taking
``{"records": [...], "params": {...}}``; the data product serves GET /data;
the coordinator takes a chain document and walks the stages over HTTP so
that injected proxies sit on the wire.
"""

from __future__ import annotations

import json

from ..httpkit import (
    Handler,
    Headers,
    HttpRequest,
    HttpResponse,
    ServerHandle,
    TransportError,
    UpstreamClient,
    json_response,
)
from .stages import (
    StageError,
    aggregate_records,
    anonymize_records,
    filter_records,
    format_records,
    sample_records,
)

STAGE_NAMES = ("filter", "aggregate", "anonymize", "format")


def _bad_request(message: str) -> HttpResponse:
    return json_response(400, {"error": message})


def apply_stage(stage: str, records: list, params: dict) -> tuple[list | str, str]:
    """Run one stage; returns (result, content_kind in {'records','document'})."""
    if stage == "filter":
        return filter_records(records, params.get("field", ""), params.get("value")), "records"
    if stage == "aggregate":
        return aggregate_records(records, params.get("field", "")), "records"
    if stage == "anonymize":
        fields = params.get("fields") or ["author"]
        return anonymize_records(records, params.get("strategy", ""), list(fields)), "records"
    if stage == "format":
        output = params.get("output", "")
        return format_records(records, output), "document"
    raise StageError(f"unknown stage {stage!r}")


def data_product_app(records: list | None = None) -> Handler:
    payload = json.dumps(records if records is not None else sample_records(),
                         ensure_ascii=False).encode("utf-8")

    def app(request: HttpRequest) -> HttpResponse:
        if request.method == "GET" and request.path == "/data":
            return HttpResponse(200, Headers({"content-type": "application/json"}), payload)
        return json_response(404, {"error": "unknown path"})

    return app


def stage_app(stage: str) -> Handler:
    if stage not in STAGE_NAMES:
        raise ValueError(f"unknown stage {stage!r}")

    def app(request: HttpRequest) -> HttpResponse:
        if request.method != "POST" or request.path != f"/{stage}":
            return json_response(404, {"error": "unknown path"})
        try:
            body = json.loads(request.read_body() or b"{}")
            records = body["records"]
            params = body.get("params", {}) or {}
        except (ValueError, KeyError):
            return _bad_request("body must be JSON with 'records' and 'params'")
        try:
            result, kind = apply_stage(stage, records, params)
        except StageError as exc:
            return _bad_request(str(exc))
        if kind == "document":
            content_type = "text/csv" if params.get("output") == "csv" else "application/json"
            return HttpResponse(200, Headers({"content-type": content_type}),
                                str(result).encode("utf-8"))
        return json_response(200, {"records": result})

    return app


class CoordinatorApp:
    """Chains stage services over HTTP, starting from the data product."""

    def __init__(self, data_product_url: str, stage_urls: dict):
        self._data_url = data_product_url
        self._stage_urls = dict(stage_urls)
        self._clients: dict = {}

    def _client(self, base_url: str) -> UpstreamClient:
        if base_url not in self._clients:
            self._clients[base_url] = UpstreamClient(base_url, request_timeout_ms=30000)
        return self._clients[base_url]

    def __call__(self, request: HttpRequest) -> HttpResponse:
        if request.method != "POST" or request.path != "/pipeline":
            return json_response(404, {"error": "unknown path"})
        try:
            chain = json.loads(request.read_body() or b"[]")
            assert isinstance(chain, list)
        except (ValueError, AssertionError):
            return _bad_request("body must be a JSON list of {stage, params}")
        for step in chain:
            stage = step.get("stage") if isinstance(step, dict) else None
            if stage not in STAGE_NAMES:
                return _bad_request(f"unknown stage {stage!r}")
            if stage not in self._stage_urls:
                return _bad_request(f"no service configured for stage {stage!r}")

        try:
            data_response = self._client(self._data_url)(
                HttpRequest(method="GET", path="/data"))
        except TransportError as exc:
            return json_response(502, {"error": str(exc), "stage": "data-product"})
        if data_response.status != 200:
            return json_response(502, {"error": "data product failed",
                                       "stage": "data-product"})
        records = json.loads(data_response.body)

        for step in chain:
            stage = step["stage"]
            params = step.get("params", {}) or {}
            payload = json.dumps({"records": records, "params": params}).encode()
            stage_request = HttpRequest(
                method="POST", path=f"/{stage}",
                headers=Headers({"content-type": "application/json"}),
                body=payload)
            try:
                response = self._client(self._stage_urls[stage])(stage_request)
            except TransportError as exc:
                return json_response(502, {"error": str(exc), "stage": stage})
            if response.status != 200:
                return json_response(502, {
                    "error": f"stage returned {response.status}",
                    "stage": stage,
                    "detail": response.body.decode("utf-8", "replace"),
                })
            if stage == "format":  # final formatting ends the chain
                return HttpResponse(200, Headers({
                    "content-type": response.headers.get("content-type", "text/plain"),
                }), response.body)
            records = json.loads(response.body)["records"]

        return json_response(200, records)


class FixturePipeline:
    """All fixture services on loopback ports, optionally proxy-rerouted."""

    def __init__(self, records: list | None = None):
        self.data_product = ServerHandle(data_product_app(records))
        self.stages = {name: ServerHandle(stage_app(name)) for name in STAGE_NAMES}
        self.stage_urls = {name: server.url for name, server in self.stages.items()}
        self._coordinator: ServerHandle | None = None

    def start_coordinator(self, stage_urls: dict | None = None,
                          data_product_url: str | None = None) -> ServerHandle:
        app = CoordinatorApp(data_product_url or self.data_product.url,
                             stage_urls or self.stage_urls)
        self._coordinator = ServerHandle(app)
        return self._coordinator

    @property
    def coordinator(self) -> ServerHandle:
        assert self._coordinator is not None, "start_coordinator() first"
        return self._coordinator

    def close(self) -> None:
        if self._coordinator is not None:
            self._coordinator.close()
        for server in self.stages.values():
            server.close()
        self.data_product.close()

    def __enter__(self) -> "FixturePipeline":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
