/** Typed fetch client plus a debounced, self-superseding evaluator. */

import type { EvaluateResponse, ParetoResponse, PolicyBody, RecordPayload,
              SensitivityResponse, SiteResponse } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: unknown) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
  }
}

async function parseError(resp: Response): Promise<never> {
  let detail: unknown = resp.statusText;
  try {
    const body = (await resp.json()) as { detail?: unknown };
    if (body && body.detail !== undefined) detail = body.detail;
  } catch {
    /* non-JSON error body; keep the status text */
  }
  throw new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(readonly baseUrl: string = "",
              readonly fetchImpl: typeof fetch = fetch) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as T;
  }

  site(): Promise<SiteResponse> {
    return this.get("/site");
  }

  async evaluate(body: PolicyBody, signal?: AbortSignal): Promise<EvaluateResponse> {
    const resp = await this.fetchImpl(this.baseUrl + "/evaluate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as EvaluateResponse;
  }

  runs(): Promise<{ runs: string[] }> {
    return this.get("/runs");
  }

  records(runId: string): Promise<{ records: RecordPayload[] }> {
    return this.get(`/runs/${encodeURIComponent(runId)}/records`);
  }

  pareto(runId: string): Promise<ParetoResponse> {
    return this.get(`/runs/${encodeURIComponent(runId)}/pareto`);
  }

  knee(runId: string): Promise<RecordPayload> {
    return this.get(`/runs/${encodeURIComponent(runId)}/knee`);
  }

  sensitivity(runId: string, param: string): Promise<SensitivityResponse> {
    return this.get(`/runs/${encodeURIComponent(runId)}/sensitivity/` +
      encodeURIComponent(param));
  }
}

/**
 * Serializes evaluation requests: rapid successive calls are debounced,
 * and a newer request aborts the in-flight one so stale responses never
 * land on screen.
 */
export class Evaluator {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private controller: AbortController | null = null;

  constructor(private readonly client: ApiClient,
              private readonly debounceMs: number = 150) {}

  schedule(body: PolicyBody): Promise<EvaluateResponse> {
    if (this.timer !== null) clearTimeout(this.timer);
    return new Promise((resolve, reject) => {
      this.timer = setTimeout(() => {
        this.timer = null;
        this.controller?.abort();
        const controller = new AbortController();
        this.controller = controller;
        this.client.evaluate(body, controller.signal).then(resolve, reject);
      }, this.debounceMs);
    });
  }

  cancel(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.controller?.abort();
    this.controller = null;
  }
}
