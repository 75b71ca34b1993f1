/** Thin typed client for the simulation service. */

import type {
  DistrictsResponse,
  RunsListResponse,
  RunSubmitResponse,
  ScenarioDoc,
  StorageTruthResponse,
  TraceResponse,
} from "./types.js";

export interface TraceFilter {
  metric?: string;
  district?: number;
}

export function traceUrl(base: string, runId: string, filter: TraceFilter = {}): string {
  const params = new URLSearchParams();
  if (filter.metric !== undefined) {
    params.set("metric", filter.metric);
  }
  if (filter.district !== undefined) {
    params.set("district", String(filter.district));
  }
  const qs = params.toString();
  return `${base}/api/runs/${encodeURIComponent(runId)}/trace${qs ? `?${qs}` : ""}`;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(url: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(url, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = (await res.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  districts(): Promise<DistrictsResponse> {
    return this.request(`${this.base}/api/districts`);
  }

  submitRun(doc: ScenarioDoc): Promise<RunSubmitResponse> {
    return this.request(`${this.base}/api/runs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
  }

  trace(runId: string, filter: TraceFilter = {}): Promise<TraceResponse> {
    return this.request(traceUrl(this.base, runId, filter));
  }

  runs(): Promise<RunsListResponse> {
    return this.request(`${this.base}/api/runs`);
  }

  storageTruth(): Promise<StorageTruthResponse> {
    return this.request(`${this.base}/api/storage-truth`);
  }
}
