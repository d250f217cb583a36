// Pattern parameter forms: field specs per pattern, client-side validation,
// and request-body construction. Submit stays disabled until validation
// passes; the built body must satisfy the control-service schema, which the
// contract tests check against recorded fixtures.

export const PATTERN_KINDS = [
  "circuit_breaker",
  "cache_aside",
  "request_collapsing",
  "gateway_offloading",
  "async_request_reply",
] as const;

export type PatternKind = (typeof PATTERN_KINDS)[number];

export type FieldSpec = {
  name: string; // dotted path for nested blocks, e.g. retry.max_retries
  label: string;
  kind: "int" | "float" | "string" | "string_list";
  min?: number;
  defaultValue: string;
};

export const PATTERN_FIELDS: Record<PatternKind, FieldSpec[]> = {
  circuit_breaker: [
    { name: "failure_threshold", label: "Failure threshold", kind: "int", min: 1, defaultValue: "5" },
    { name: "open_duration_ms", label: "Open duration (ms)", kind: "int", min: 1, defaultValue: "10000" },
    { name: "half_open_max_probes", label: "Half-open probes", kind: "int", min: 1, defaultValue: "1" },
    { name: "retry.max_retries", label: "Max retries", kind: "int", min: 0, defaultValue: "2" },
    { name: "retry.backoff_base_ms", label: "Backoff base (ms)", kind: "int", min: 1, defaultValue: "100" },
    { name: "retry.backoff_multiplier", label: "Backoff multiplier", kind: "float", min: 1, defaultValue: "2.0" },
  ],
  cache_aside: [
    { name: "ttl_seconds", label: "TTL (s)", kind: "int", min: 1, defaultValue: "30" },
    { name: "max_entries", label: "Max entries", kind: "int", min: 1, defaultValue: "1024" },
    { name: "max_cacheable_body_bytes", label: "Max body (bytes)", kind: "int", min: 1, defaultValue: "1048576" },
    { name: "vary_headers", label: "Vary headers", kind: "string_list", defaultValue: "" },
  ],
  request_collapsing: [
    { name: "max_waiters", label: "Max waiters", kind: "int", min: 1, defaultValue: "256" },
    { name: "wait_timeout_ms", label: "Wait timeout (ms)", kind: "int", min: 1, defaultValue: "5000" },
  ],
  gateway_offloading: [
    { name: "rate_per_second", label: "Rate (req/s)", kind: "float", min: 0, defaultValue: "50" },
    { name: "burst", label: "Burst", kind: "int", min: 1, defaultValue: "100" },
    { name: "max_body_bytes", label: "Max body (bytes)", kind: "int", min: 1, defaultValue: "1048576" },
    { name: "client_key", label: "Client key", kind: "string", defaultValue: "source-address" },
  ],
  async_request_reply: [
    { name: "wrapped_path_prefixes", label: "Wrapped prefixes", kind: "string_list", defaultValue: "/" },
    { name: "job_ttl_seconds", label: "Job TTL (s)", kind: "int", min: 1, defaultValue: "300" },
    { name: "worker_concurrency", label: "Workers", kind: "int", min: 1, defaultValue: "4" },
    { name: "poll_path_prefix", label: "Poll prefix", kind: "string", defaultValue: "/jobs" },
  ],
};

export type PatternFormState = {
  pattern: PatternKind;
  manifestSetId: string;
  targetService: string;
  targetNamespace: string;
  values: Record<string, string>; // raw input strings keyed by field name
};

export function defaultForm(pattern: PatternKind): PatternFormState {
  const values: Record<string, string> = {};
  for (const field of PATTERN_FIELDS[pattern]) {
    values[field.name] = field.defaultValue;
  }
  return {
    pattern,
    manifestSetId: "",
    targetService: "",
    targetNamespace: "pipeline",
    values,
  };
}

function parseField(spec: FieldSpec, raw: string): { value?: unknown; error?: string } {
  const trimmed = raw.trim();
  if (spec.kind === "string") {
    if (!trimmed) return { error: `${spec.label} must not be empty` };
    return { value: trimmed };
  }
  if (spec.kind === "string_list") {
    const entries = trimmed === "" ? [] : trimmed.split(",").map((e) => e.trim());
    if (entries.some((e) => e === "")) return { error: `${spec.label} has an empty entry` };
    return { value: entries };
  }
  const parsed = spec.kind === "int" ? Number.parseInt(trimmed, 10) : Number.parseFloat(trimmed);
  if (!Number.isFinite(parsed) || (spec.kind === "int" && String(parsed) !== trimmed)) {
    return { error: `${spec.label} must be a ${spec.kind === "int" ? "whole number" : "number"}` };
  }
  if (spec.min !== undefined && parsed < spec.min) {
    return { error: `${spec.label} must be at least ${spec.min}` };
  }
  if (spec.kind === "float" && spec.min === 0 && parsed <= 0) {
    return { error: `${spec.label} must be positive` };
  }
  return { value: parsed };
}

export function validateForm(form: PatternFormState): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!form.manifestSetId.trim()) errors["manifestSetId"] = "upload a manifest set first";
  if (!form.targetService.trim()) errors["targetService"] = "select a target service";
  for (const spec of PATTERN_FIELDS[form.pattern]) {
    const result = parseField(spec, form.values[spec.name] ?? "");
    if (result.error) errors[spec.name] = result.error;
  }
  return errors;
}

export function canSubmit(form: PatternFormState): boolean {
  return Object.keys(validateForm(form)).length === 0;
}

export function buildInjectionBody(form: PatternFormState): Record<string, unknown> {
  const errors = validateForm(form);
  if (Object.keys(errors).length > 0) {
    throw new Error(`form has validation errors: ${Object.keys(errors).join(", ")}`);
  }
  const parameters: Record<string, unknown> = {};
  for (const spec of PATTERN_FIELDS[form.pattern]) {
    const { value } = parseField(spec, form.values[spec.name] ?? "");
    const path = spec.name.split(".");
    if (path.length === 2) {
      const [block, key] = path as [string, string];
      const nested = (parameters[block] ??= {}) as Record<string, unknown>;
      nested[key] = value;
    } else {
      parameters[spec.name] = value;
    }
  }
  return {
    manifest_set_id: form.manifestSetId.trim(),
    pattern: form.pattern,
    target_service: form.targetService.trim(),
    target_namespace: form.targetNamespace.trim() || "pipeline",
    parameters,
  };
}

// Structural schema check used by the contract tests: a body is acceptable
// when the control service would parse it without a BAD_SELECTION error.
export function validateInjectionBody(body: unknown): string[] {
  const problems: string[] = [];
  if (typeof body !== "object" || body === null) return ["body must be an object"];
  const record = body as Record<string, unknown>;
  if (typeof record.manifest_set_id !== "string" || !record.manifest_set_id) {
    problems.push("manifest_set_id must be a non-empty string");
  }
  const pattern = record.pattern;
  if (typeof pattern !== "string" || !PATTERN_KINDS.includes(pattern as PatternKind)) {
    problems.push(`pattern must be one of ${PATTERN_KINDS.join(", ")}`);
    return problems;
  }
  if (typeof record.target_service !== "string" || !record.target_service) {
    problems.push("target_service must be a non-empty string");
  }
  const parameters = (record.parameters ?? {}) as Record<string, unknown>;
  if (typeof parameters !== "object" || parameters === null || Array.isArray(parameters)) {
    problems.push("parameters must be an object");
    return problems;
  }
  const specs = PATTERN_FIELDS[pattern as PatternKind];
  const specByPath = new Map(specs.map((s) => [s.name, s]));
  const flat: Record<string, unknown> = {};
  for (const [key, value] of Object.entries(parameters)) {
    if (typeof value === "object" && value !== null && !Array.isArray(value)) {
      for (const [inner, innerValue] of Object.entries(value as Record<string, unknown>)) {
        flat[`${key}.${inner}`] = innerValue;
      }
    } else {
      flat[key] = value;
    }
  }
  for (const [path, value] of Object.entries(flat)) {
    const spec = specByPath.get(path);
    if (!spec) {
      problems.push(`unknown parameter ${path}`);
      continue;
    }
    if (spec.kind === "int" && (!Number.isInteger(value) || (spec.min !== undefined && (value as number) < spec.min))) {
      problems.push(`${path} must be an integer >= ${spec.min ?? 0}`);
    } else if (spec.kind === "float" && typeof value !== "number") {
      problems.push(`${path} must be a number`);
    } else if (spec.kind === "string" && typeof value !== "string") {
      problems.push(`${path} must be a string`);
    } else if (spec.kind === "string_list" &&
               (!Array.isArray(value) || value.some((v) => typeof v !== "string"))) {
      problems.push(`${path} must be a list of strings`);
    }
  }
  return problems;
}
