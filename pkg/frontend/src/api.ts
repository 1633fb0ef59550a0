// Thin typed wrapper around the gateway endpoints. Every non-2xx response
// carries {"error": {code, message, details}} and surfaces as an ApiError.

import type {
  DashboardStats, IngestPreview, InstanceGroup, JobPayload, RunInfo, SearchResponse,
} from "./types.js";

export class ApiError extends Error {
  code: string;
  status: number;
  details: Record<string, unknown>;

  constructor(status: number, code: string, message: string, details: Record<string, unknown> = {}) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.details = details;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raise(res: Response): Promise<never> {
  let code = "HTTPError";
  let message = res.statusText || `HTTP ${res.status}`;
  let details: Record<string, unknown> = {};
  try {
    const body = await res.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      details = body.error.details ?? {};
    }
  } catch {
    // non-JSON error body, keep the status line
  }
  throw new ApiError(res.status, code, message, details);
}

export class ApiClient {
  private base: string;
  private fetcher: FetchLike;

  constructor(base = "", fetcher: FetchLike = (input, init) => fetch(input, init)) {
    this.base = base.replace(/\/$/, "");
    this.fetcher = fetcher;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetcher(this.base + path, init);
    if (!res.ok) await raise(res);
    return res.json() as Promise<T>;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.json<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string; version: string }> {
    return this.json("/api/health");
  }

  listRuns(): Promise<{ runs: RunInfo[] }> {
    return this.json("/api/runs");
  }

  createRun(body: {
    name: string; source_lang: string; target_lang: string;
    metrics?: string[]; device_hints?: string[];
  }): Promise<RunInfo> {
    return this.post("/api/runs", body);
  }

  addInstances(
    runId: string,
    instances: { source: string | null; prediction: string; reference: string | null }[],
  ): Promise<{ run_id: string; added: number; total: number }> {
    return this.post(`/api/runs/${runId}/instances`, { instances });
  }

  /** Multipart upload; the extraction spec rides along as a sibling field. */
  ingest(runId: string, files: File[], spec: unknown, dryRun: boolean): Promise<IngestPreview> {
    const form = new FormData();
    for (const file of files) form.append("files", file);
    form.append("spec", JSON.stringify(spec));
    if (dryRun) form.append("dry_run", "true");
    return this.json(`/api/runs/${runId}/ingest`, { method: "POST", body: form });
  }

  evaluate(runId: string, metrics?: string[], deviceHints?: string[]): Promise<JobPayload> {
    const body: Record<string, unknown> = {};
    if (metrics && metrics.length) body.metrics = metrics;
    if (deviceHints && deviceHints.length) body.device_hints = deviceHints;
    return this.post(`/api/runs/${runId}/evaluate`, body);
  }

  jobStatus(jobId: string): Promise<JobPayload> {
    return this.json(`/api/jobs/${jobId}`);
  }

  search(body: {
    run_ids: string[]; query?: string | { field: string; pattern: string; conjunction: string }[] | null;
    page?: number; page_size?: number;
  }): Promise<SearchResponse> {
    return this.post("/api/search", body);
  }

  groups(runIds: string[], page = 1, pageSize = 20): Promise<SearchResponse> {
    const params = new URLSearchParams({
      runs: runIds.join(","), page: String(page), page_size: String(pageSize),
    });
    return this.json(`/api/groups?${params}`);
  }

  runSummary(runId: string, binCount = 20): Promise<DashboardStats> {
    return this.json(`/api/runs/${runId}/summary?bin_count=${binCount}`);
  }

  compare(runIds: string[], binCount = 20): Promise<{ runs: DashboardStats[] }> {
    return this.post("/api/dashboard/compare", { run_ids: runIds, bin_count: binCount });
  }

  submitRanking(body: {
    run_ids: string[]; group_key: string; ordering: string[];
    session_id: string; consented: boolean;
  }): Promise<{ stored: boolean }> {
    return this.post("/api/feedback/ranking", body);
  }

  revokeFeedback(sessionId: string): Promise<{ removed: number }> {
    return this.json(`/api/feedback/${sessionId}`, { method: "DELETE" });
  }

  async exportFeedback(): Promise<Record<string, unknown>[]> {
    const res = await this.fetcher(this.base + "/api/feedback/export");
    if (!res.ok) await raise(res);
    const text = await res.text();
    return text.split("\n").filter(line => line.trim() !== "").map(line => JSON.parse(line));
  }
}

/** Used by the group view as the InstanceGroup source; re-exported for tests. */
export type GroupSource = (runIds: string[], page: number) => Promise<{ groups: InstanceGroup[] }>;
