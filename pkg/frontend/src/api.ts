/** Thin typed client for the trajectory service. All model math lives on the
 * server; this module only moves JSON back and forth. */

import type {
  DemoEcho,
  GenerateResponse,
  JobRecord,
  QueryDict,
  ScenarioDict,
  ScenarioRecord,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (typeof body?.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => asJson<T>(r));
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchFn(this.baseUrl + path).then((r) => asJson<T>(r));
  }

  createScenario(opts: {
    kind?: string;
    regime?: string;
    seed?: number;
    scenario?: ScenarioDict;
    horizon?: number;
  }): Promise<ScenarioRecord> {
    return this.post("/scenarios", opts);
  }

  getScenario(id: string): Promise<ScenarioRecord> {
    return this.get(`/scenarios/${id}`);
  }

  submitDemo(scenarioId: string, trajectory: number[][]): Promise<DemoEcho> {
    return this.post(`/scenarios/${scenarioId}/demos`, { trajectory });
  }

  removeLastDemo(scenarioId: string): Promise<{ remaining: number }> {
    return this.fetchFn(`${this.baseUrl}/scenarios/${scenarioId}/demos/last`, {
      method: "DELETE",
    }).then((r) => asJson(r));
  }

  submitJob(opts: {
    kind: string;
    scenario_id?: string;
    method?: string;
    seed?: number;
    task?: string;
    trials?: number;
    hyper?: Record<string, unknown>;
  }): Promise<JobRecord> {
    return this.post("/jobs", opts);
  }

  getJob(id: string): Promise<JobRecord> {
    return this.get(`/jobs/${id}`);
  }

  /** Poll until the job leaves the queue; resolves on "done", rejects on
   * "failed". */
  pollJob(
    id: string,
    opts: { intervalMs?: number; onUpdate?: (job: JobRecord) => void } = {},
  ): Promise<JobRecord> {
    const intervalMs = opts.intervalMs ?? 1000;
    return new Promise((resolve, reject) => {
      const tick = () => {
        this.getJob(id)
          .then((job) => {
            opts.onUpdate?.(job);
            if (job.status === "done") resolve(job);
            else if (job.status === "failed")
              reject(new Error(job.error ?? "job failed"));
            else setTimeout(tick, intervalMs);
          })
          .catch(reject);
      };
      tick();
    });
  }

  generate(
    modelId: string,
    query: QueryDict,
    opts: { policy?: string; seed?: number } = {},
  ): Promise<GenerateResponse> {
    return this.post(`/models/${modelId}/generate`, {
      query,
      policy: opts.policy ?? "mean",
      seed: opts.seed ?? 0,
    });
  }

  modelSummary(modelId: string): Promise<Record<string, unknown>> {
    return this.get(`/models/${modelId}/summary`);
  }
}
