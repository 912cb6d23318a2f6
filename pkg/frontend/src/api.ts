/** Typed client for the annotation service HTTP API.
 *
 * This module is the only place that talks to the network; everything the
 * console renders is traceable to one of these responses.
 */

export interface CandidateScore {
  name: string;
  score: number;
}

/** Mirrors exactly one pending /api/queries entry. */
export interface QueryCard {
  sample_id: string;
  kind: "label" | "verify";
  claimed: string | null;
  candidates: CandidateScore[];
  feature_summary: number[];
}

export interface StatusInfo {
  iteration: number;
  categories: string[];
  annotated: number;
  pseudo: number;
  pending: number;
  accuracy: number | null;
  error: string | null;
}

export interface MetricRecord {
  t: number;
  requested: number;
  answered: number;
  corrections: number;
  pseudo_count: number;
  pseudo_error: number;
  rank1: number;
  objective: number;
  lam: number[];
  annotated_total: number;
  new_classes: string[];
  wall_time: number;
}

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ApiError extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.base + path);
    if (response.status !== 200) {
      throw new ApiError(response.status, `GET ${path} -> ${response.status}`);
    }
    return (await response.json()) as T;
  }

  private async post(path: string, body: unknown): Promise<number> {
    const response = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return response.status;
  }

  getStatus(): Promise<StatusInfo> {
    return this.get<StatusInfo>("/api/status");
  }

  getQueries(): Promise<QueryCard[]> {
    return this.get<QueryCard[]>("/api/queries");
  }

  getMetrics(): Promise<MetricRecord[]> {
    return this.get<MetricRecord[]>("/api/metrics");
  }

  /** Returns the HTTP status: 200 applied, 409 no such pending query,
   *  422 category unknown to the engine. */
  postLabel(sampleId: string, category: string): Promise<number> {
    return this.post("/api/labels", { sample_id: sampleId, category });
  }

  postCategory(name: string): Promise<number> {
    return this.post("/api/categories", { name });
  }
}
