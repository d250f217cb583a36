// Plain-HTTP polling (1 s interval) for run status and injection state.

import type { ApiClient } from "./api.js";
import type { RunRecord } from "./types.js";

export type PollOptions = {
  intervalMs?: number;
  timeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
};

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollUntil<T>(fetchOnce: () => Promise<T>,
                                   settled: (value: T) => boolean,
                                   options: PollOptions = {}): Promise<T> {
  const intervalMs = options.intervalMs ?? 1000;
  const timeoutMs = options.timeoutMs ?? 300_000;
  const sleep = options.sleep ?? defaultSleep;
  const startedAt = Date.now();
  for (;;) {
    const value = await fetchOnce();
    if (settled(value)) {
      return value;
    }
    if (Date.now() - startedAt > timeoutMs) {
      throw new Error("polling timed out");
    }
    await sleep(intervalMs);
  }
}

export function pollRunUntilSettled(api: ApiClient, runId: string,
                                    options: PollOptions = {}): Promise<RunRecord> {
  return pollUntil(() => api.getRun(runId),
                   (record) => record.status === "done" || record.status === "failed",
                   options);
}
