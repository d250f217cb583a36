import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api.js";
import type { InjectionResponse, RunRecord, SeriesEntry, ServiceEntry } from "../src/types.js";
import { loadFixture, mockFetch } from "./helpers.js";

describe("ApiClient", () => {
  it("issues POST /cluster with an empty JSON body", async () => {
    const { impl, calls } = mockFetch(() => ({ status: 200, body: { status: "created" } }));
    const api = new ApiClient("http://control", impl);
    const result = await api.createCluster();
    expect(result.status).toBe("created");
    expect(calls).toHaveLength(1);
    expect(calls[0]).toMatchObject({ url: "http://control/cluster", method: "POST" });
    expect(JSON.parse(calls[0]!.body!)).toEqual({});
  });

  it("issues DELETE /cluster", async () => {
    const { impl, calls } = mockFetch(() => ({ status: 200, body: { status: "deleted" } }));
    await new ApiClient("http://control", impl).deleteCluster();
    expect(calls[0]).toMatchObject({ url: "http://control/cluster", method: "DELETE" });
  });

  it("uploads manifests as a raw text body", async () => {
    const fixture = loadFixture("manifest-set-response");
    const { impl, calls } = mockFetch(() => ({ status: 200, body: fixture }));
    const info = await new ApiClient("http://control", impl)
      .uploadManifests("kind: Service\n");
    expect(calls[0]).toMatchObject({ url: "http://control/manifest-sets", method: "POST" });
    expect(calls[0]!.body).toBe("kind: Service\n");
    expect(info.services.length).toBe(6);
  });

  it("passes the namespace filter through to GET /services", async () => {
    const services = loadFixture<ServiceEntry[]>("services-response");
    const { impl, calls } = mockFetch(() => ({ status: 200, body: services }));
    const got = await new ApiClient("http://control", impl).listServices("pipeline");
    expect(calls[0]!.url).toBe("http://control/services?namespace=pipeline");
    expect(got).toEqual(services);
  });

  it("posts injection bodies and parses readiness", async () => {
    const fixture = loadFixture<InjectionResponse>("injection-response");
    const request = loadFixture<Record<string, unknown>>("injection-request");
    const { impl, calls } = mockFetch(() => ({ status: 200, body: fixture }));
    const response = await new ApiClient("http://control", impl).injectPattern(request);
    expect(calls[0]).toMatchObject({ url: "http://control/injections", method: "POST" });
    expect(JSON.parse(calls[0]!.body!)).toEqual(request);
    expect(response.readiness.overall).toBe(true);
  });

  it("maps error bodies onto ApiRequestError with the server's code", async () => {
    const errorBody = loadFixture("error-already-injected");
    const { impl } = mockFetch(() => ({ status: 409, body: errorBody }));
    const api = new ApiClient("http://control", impl);
    const request = loadFixture<Record<string, unknown>>("injection-request");
    await expect(api.injectPattern(request)).rejects.toMatchObject({
      status: 409,
      code: "ALREADY_INJECTED",
    });
    await expect(api.injectPattern(request)).rejects.toBeInstanceOf(ApiRequestError);
  });

  it("fetches run records and series", async () => {
    const record = loadFixture<RunRecord>("run-record");
    const series = loadFixture<SeriesEntry[]>("series");
    const { impl, calls } = mockFetch((url) =>
      url.endsWith("/series.json")
        ? { status: 200, body: series }
        : { status: 200, body: record });
    const api = new ApiClient("http://control", impl);
    expect((await api.getRun(record.run_id)).status).toBe("done");
    expect(await api.getSeries(record.run_id)).toEqual(series);
    expect(calls.map((c) => c.url)).toEqual([
      `http://control/runs/${record.run_id}`,
      `http://control/runs/${record.run_id}/series.json`,
    ]);
  });

  it("builds the metrics CSV download link", () => {
    const api = new ApiClient("http://control");
    expect(api.metricsCsvUrl("abc")).toBe("http://control/runs/abc/metrics.csv");
  });
});
