// Shapes of the control-service HTTP API bodies the UI consumes.
// Contract tests pin these against recorded fixtures.

export type ApiErrorBody = {
  code: string;
  message: string;
  details?: unknown;
};

export type ServiceEntry = {
  name: string;
  namespace: string;
  ports: number[];
};

export type ManifestSetInfo = {
  manifest_set_id: string;
  documents: number;
  services: { namespace: string; name: string }[];
  warnings: string[];
};

export type ReadinessResource = {
  kind: string;
  namespace: string;
  name: string;
  status: "ready" | "pending" | "failed";
};

export type Readiness = {
  overall: boolean;
  elapsed_ms: number;
  resources: ReadinessResource[];
};

export type InjectionResponse = {
  injection_id: string;
  readiness: Readiness;
};

export type InjectionRecord = {
  injection_id: string;
  manifest_set_id: string;
  selection: {
    pattern: string;
    variant: string;
    target_service: string;
    target_namespace: string;
    pattern_namespace: string;
    parameters: Record<string, unknown>;
  };
  status: "applied" | "removed";
  ready: boolean;
};

export type RunStatus = "created" | "running" | "done" | "failed";

export type RunRecord = {
  run_id: string;
  pattern: string;
  workload: {
    name: string;
    step_users: number;
    step_interval_s: number;
    duration_s: number;
    targets: string[];
  };
  status: RunStatus;
  started_at: number | null;
  ended_at: number | null;
  artifact_paths: Record<string, unknown>;
  error: string | null;
};

export type SeriesEntry = {
  pattern: string;
  workload: string;
  namespace: string;
  points: [number, number][];
};
