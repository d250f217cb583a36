// Browser wiring. All state lives server-side; refreshing the page
// reconstructs everything from GET endpoints.

import { ApiClient, ApiRequestError } from "./api.js";
import {
  EMPTY_SERIES_MESSAGE,
  groupSeries,
  renderChartSvg,
} from "./dashboard.js";
import {
  PATTERN_FIELDS,
  PATTERN_KINDS,
  buildInjectionBody,
  canSubmit,
  defaultForm,
  type PatternFormState,
  type PatternKind,
} from "./patternForm.js";
import { PendingGuard } from "./pending.js";
import { pollRunUntilSettled } from "./polling.js";

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(target: HTMLElement, error: unknown): void {
  if (error instanceof ApiRequestError) {
    target.textContent = `[${error.code}] ${error.message}`;
  } else {
    target.textContent = String(error);
  }
  target.classList.add("error");
}

function clearError(target: HTMLElement): void {
  target.textContent = "";
  target.classList.remove("error");
}

// ----- cluster controls -----

const clusterGuard = new PendingGuard();

function bindClusterControls(): void {
  const status = el<HTMLSpanElement>("cluster-status");
  const errorBox = el<HTMLDivElement>("cluster-error");
  const createButton = el<HTMLButtonElement>("cluster-create");
  const deleteButton = el<HTMLButtonElement>("cluster-delete");

  const setPending = (pending: boolean) => {
    createButton.disabled = pending;
    deleteButton.disabled = pending;
    if (pending) status.textContent = "working...";
  };

  createButton.addEventListener("click", () => {
    void clusterGuard.run(async () => {
      setPending(true);
      clearError(errorBox);
      try {
        const result = await api.createCluster();
        status.textContent = result.status;
      } catch (error) {
        status.textContent = "error";
        showError(errorBox, error);
      } finally {
        setPending(false);
      }
    });
  });

  deleteButton.addEventListener("click", () => {
    void clusterGuard.run(async () => {
      setPending(true);
      clearError(errorBox);
      try {
        const result = await api.deleteCluster();
        status.textContent = result.status;
      } catch (error) {
        status.textContent = "error";
        showError(errorBox, error);
      } finally {
        setPending(false);
      }
    });
  });
}

// ----- manifests and services -----

let currentSetId = "";

async function refreshServices(): Promise<void> {
  const dropdown = el<HTMLSelectElement>("form-target");
  const namespace = el<HTMLInputElement>("services-namespace").value || undefined;
  const services = await api.listServices(namespace);
  dropdown.innerHTML = "";
  for (const service of services) {
    const option = document.createElement("option");
    option.value = service.name;
    option.textContent = `${service.namespace}/${service.name}`;
    dropdown.appendChild(option);
  }
}

function bindManifestUpload(): void {
  const errorBox = el<HTMLDivElement>("manifest-error");
  const info = el<HTMLDivElement>("manifest-info");
  el<HTMLButtonElement>("manifest-upload").addEventListener("click", async () => {
    clearError(errorBox);
    try {
      const text = el<HTMLTextAreaElement>("manifest-text").value;
      const result = await api.uploadManifests(text);
      currentSetId = result.manifest_set_id;
      info.textContent =
        `set ${result.manifest_set_id}: ${result.documents} documents, ` +
        `${result.services.length} services`;
      await api.deployManifestSet(result.manifest_set_id);
      await refreshServices();
    } catch (error) {
      showError(errorBox, error);
    }
  });
}

// ----- pattern form and injections -----

let form: PatternFormState = defaultForm("circuit_breaker");

function renderParameterFields(): void {
  const container = el<HTMLDivElement>("form-params");
  container.innerHTML = "";
  for (const spec of PATTERN_FIELDS[form.pattern]) {
    const label = document.createElement("label");
    label.textContent = spec.label;
    const input = document.createElement("input");
    input.value = form.values[spec.name] ?? spec.defaultValue;
    input.addEventListener("input", () => {
      form.values[spec.name] = input.value;
      updateSubmitState();
    });
    label.appendChild(input);
    container.appendChild(label);
  }
}

function updateSubmitState(): void {
  form.manifestSetId = currentSetId;
  const target = el<HTMLSelectElement>("form-target");
  form.targetService = target.value;
  el<HTMLButtonElement>("form-submit").disabled = !canSubmit(form);
}

async function refreshInjections(): Promise<void> {
  const list = el<HTMLUListElement>("injection-list");
  const records = await api.listInjections();
  list.innerHTML = "";
  for (const record of records.filter((r) => r.status === "applied")) {
    const item = document.createElement("li");
    item.textContent =
      `${record.selection.pattern} on ${record.selection.target_service} `;
    const removeButton = document.createElement("button");
    removeButton.textContent = "Remove";
    removeButton.addEventListener("click", async () => {
      removeButton.disabled = true;
      await api.removePattern(record.injection_id);
      await refreshInjections();
    });
    item.appendChild(removeButton);
    list.appendChild(item);
  }
}

function bindPatternForm(): void {
  const kindSelect = el<HTMLSelectElement>("form-pattern");
  for (const kind of PATTERN_KINDS) {
    const option = document.createElement("option");
    option.value = kind;
    option.textContent = kind;
    kindSelect.appendChild(option);
  }
  kindSelect.addEventListener("change", () => {
    form = defaultForm(kindSelect.value as PatternKind);
    form.manifestSetId = currentSetId;
    renderParameterFields();
    updateSubmitState();
  });
  el<HTMLSelectElement>("form-target").addEventListener("change", updateSubmitState);

  const errorBox = el<HTMLDivElement>("injection-error");
  const readiness = el<HTMLDivElement>("readiness-panel");
  const submitGuard = new PendingGuard();
  el<HTMLButtonElement>("form-submit").addEventListener("click", () => {
    void submitGuard.run(async () => {
      clearError(errorBox);
      readiness.textContent = "injecting...";
      try {
        const response = await api.injectPattern(buildInjectionBody(form));
        const states = response.readiness.resources
          .map((r) => `${r.kind}/${r.name}: ${r.status}`)
          .join(", ");
        readiness.textContent =
          `${response.injection_id}: ${response.readiness.overall ? "ready" : "not ready"} (${states})`;
        await refreshInjections();
      } catch (error) {
        readiness.textContent = "";
        showError(errorBox, error);
        if (error instanceof ApiRequestError && error.code === "READINESS_TIMEOUT") {
          readiness.textContent = JSON.stringify(error.details);
        }
      }
    });
  });

  renderParameterFields();
  updateSubmitState();
}

// ----- runs and dashboard -----

function bindRunLauncher(): void {
  const errorBox = el<HTMLDivElement>("run-error");
  const statusBox = el<HTMLDivElement>("run-status");
  const launchGuard = new PendingGuard();
  el<HTMLButtonElement>("run-start").addEventListener("click", () => {
    void launchGuard.run(async () => {
      clearError(errorBox);
      try {
        const body = {
          profile: el<HTMLSelectElement>("run-profile").value,
          duration_s: Number.parseInt(el<HTMLInputElement>("run-duration").value, 10),
          targets: [el<HTMLInputElement>("run-target").value],
          request: {
            method: el<HTMLInputElement>("run-method").value || "GET",
            path: el<HTMLInputElement>("run-path").value || "/",
            body: el<HTMLTextAreaElement>("run-body").value,
          },
        };
        const { run_id } = await api.startRun(body);
        statusBox.textContent = `run ${run_id}: running...`;
        const record = await pollRunUntilSettled(api, run_id);
        statusBox.textContent = `run ${run_id}: ${record.status}`;
        el<HTMLInputElement>("dashboard-run-id").value = run_id;
      } catch (error) {
        showError(errorBox, error);
      }
    });
  });
}

async function renderDashboard(runId: string): Promise<void> {
  const container = el<HTMLDivElement>("charts");
  const errorBox = el<HTMLDivElement>("dashboard-error");
  clearError(errorBox);
  container.innerHTML = "";
  try {
    const series = await api.getSeries(runId);
    if (series.length === 0) {
      container.textContent = EMPTY_SERIES_MESSAGE;
      return;
    }
    for (const chart of groupSeries(series)) {
      const wrapper = document.createElement("div");
      wrapper.innerHTML = renderChartSvg(chart);
      container.appendChild(wrapper);
    }
    const link = el<HTMLAnchorElement>("csv-link");
    link.href = api.metricsCsvUrl(runId);
    link.textContent = "download metrics.csv";
  } catch (error) {
    if (error instanceof ApiRequestError && error.code === "RUN_NOT_FINISHED") {
      container.textContent = "run in progress";
      return;
    }
    showError(errorBox, error);
  }
}

function bindDashboard(): void {
  el<HTMLButtonElement>("dashboard-load").addEventListener("click", () => {
    const runId = el<HTMLInputElement>("dashboard-run-id").value.trim();
    if (runId) void renderDashboard(runId);
  });
}

document.addEventListener("DOMContentLoaded", () => {
  bindClusterControls();
  bindManifestUpload();
  bindPatternForm();
  bindRunLauncher();
  bindDashboard();
  el<HTMLButtonElement>("services-refresh").addEventListener("click", () => {
    void refreshServices();
  });
});
