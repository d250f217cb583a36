// Thin typed client over the control-service HTTP API. The UI holds no
// business logic: every state change below is exactly one API call.

import type {
  InjectionRecord,
  InjectionResponse,
  ManifestSetInfo,
  RunRecord,
  SeriesEntry,
  ServiceEntry,
} from "./types.js";

export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: unknown;

  constructor(status: number, code: string, message: string, details?: unknown) {
    super(message);
    this.status = status;
    this.code = code;
    this.details = details;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: BodyInit,
                           contentType?: string): Promise<T> {
    const headers: Record<string, string> = {};
    if (contentType) {
      headers["content-type"] = contentType;
    }
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body,
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const code = payload?.code ?? "HTTP_ERROR";
      const message = payload?.message ?? `HTTP ${response.status}`;
      throw new ApiRequestError(response.status, code, message, payload?.details);
    }
    return payload as T;
  }

  createCluster(cpus?: number, memoryGb?: number): Promise<{ status: string }> {
    const body: Record<string, number> = {};
    if (cpus !== undefined) body.cpus = cpus;
    if (memoryGb !== undefined) body.memory_gb = memoryGb;
    return this.request("POST", "/cluster", JSON.stringify(body), "application/json");
  }

  deleteCluster(): Promise<{ status: string }> {
    return this.request("DELETE", "/cluster");
  }

  uploadManifests(yamlText: string): Promise<ManifestSetInfo> {
    return this.request("POST", "/manifest-sets", yamlText, "text/yaml");
  }

  deployManifestSet(setId: string): Promise<{ deployed: boolean; documents: number }> {
    return this.request("POST", `/manifest-sets/${encodeURIComponent(setId)}/deploy`);
  }

  listServices(namespace?: string): Promise<ServiceEntry[]> {
    const query = namespace ? `?namespace=${encodeURIComponent(namespace)}` : "";
    return this.request("GET", `/services${query}`);
  }

  injectPattern(body: Record<string, unknown>): Promise<InjectionResponse> {
    return this.request("POST", "/injections", JSON.stringify(body), "application/json");
  }

  listInjections(): Promise<InjectionRecord[]> {
    return this.request("GET", "/injections");
  }

  removePattern(injectionId: string): Promise<{ removed: boolean }> {
    return this.request("DELETE", `/injections/${encodeURIComponent(injectionId)}`);
  }

  startRun(body: Record<string, unknown>): Promise<{ run_id: string }> {
    return this.request("POST", "/runs", JSON.stringify(body), "application/json");
  }

  getRun(runId: string): Promise<RunRecord> {
    return this.request("GET", `/runs/${encodeURIComponent(runId)}`);
  }

  getSeries(runId: string): Promise<SeriesEntry[]> {
    return this.request("GET", `/runs/${encodeURIComponent(runId)}/series.json`);
  }

  metricsCsvUrl(runId: string): string {
    return `${this.baseUrl}/runs/${encodeURIComponent(runId)}/metrics.csv`;
  }
}
