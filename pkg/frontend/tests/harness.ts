/** Scripted service harness for offline CI.
 *
 * Replays recorded API fixtures (captured from a live engine run) behind the
 * FetchLike seam: pending queries disappear when answered, a ledger record
 * appears when the outstanding batch is done, and verify answers that differ
 * from the claimed category land in a corrections log — the same observable
 * behavior as the real service.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { FetchLike, MetricRecord, QueryCard, StatusInfo } from "../src/api.js";

const fixtureDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function loadFixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(fixtureDir, name), "utf8")) as T;
}

export interface Correction {
  sample_id: string;
  claimed: string;
  answered: string;
}

interface Pending extends QueryCard {}

export class FakeService {
  pending: Pending[];
  metrics: MetricRecord[];
  status: StatusInfo;
  corrections: Correction[] = [];
  extraCategories: string[] = [];
  answers: Array<{ sample_id: string; category: string }> = [];
  requestLog: string[] = [];
  down = false;

  constructor(pending: QueryCard[], metrics: MetricRecord[], status: StatusInfo) {
    this.pending = pending.map((q) => ({ ...q }));
    this.metrics = [...metrics];
    this.status = { ...status, pending: this.pending.length };
  }

  static fromFixtures(): FakeService {
    const queries = loadFixture<QueryCard[]>("queries.json");
    const metrics = loadFixture<MetricRecord[]>("metrics.json");
    const status = loadFixture<StatusInfo>("status_initial.json");
    const label = queries.find((q) => q.kind === "label")!;
    const verify = queries.find((q) => q.kind === "verify")!;
    // three pending queries, as in a live batch: two labels and one verify
    const second: QueryCard = { ...label, sample_id: label.sample_id + "b" };
    return new FakeService([label, second, verify], metrics.slice(0, 2), status);
  }

  private validCategory(category: string): boolean {
    return (
      category === "unknown" ||
      category.startsWith("new:") ||
      this.status.categories.includes(category) ||
      this.extraCategories.includes(category)
    );
  }

  fetch: FetchLike = async (input, init) => {
    this.requestLog.push(`${init?.method ?? "GET"} ${input}`);
    if (this.down) {
      throw new Error("connection refused");
    }
    const respond = (status: number, body: unknown) => ({
      status,
      json: async () => body,
    });
    if (!init || !init.method || init.method === "GET") {
      if (input.endsWith("/api/status")) {
        return respond(200, { ...this.status, pending: this.pending.length });
      }
      if (input.endsWith("/api/queries")) {
        return respond(200, this.pending.map((q) => ({ ...q })));
      }
      if (input.endsWith("/api/metrics")) {
        return respond(200, [...this.metrics]);
      }
      return respond(404, { error: "no such route" });
    }
    if (input.endsWith("/api/labels")) {
      const body = JSON.parse(init.body ?? "{}") as {
        sample_id?: string;
        category?: string;
      };
      if (!body.sample_id || !body.category || !this.validCategory(body.category)) {
        return respond(422, { error: "invalid" });
      }
      const index = this.pending.findIndex((q) => q.sample_id === body.sample_id);
      if (index < 0) {
        return respond(409, { error: "no pending query" });
      }
      const [query] = this.pending.splice(index, 1);
      this.answers.push({ sample_id: body.sample_id, category: body.category });
      if (query.kind === "verify" && query.claimed !== null && body.category !== query.claimed) {
        this.corrections.push({
          sample_id: query.sample_id,
          claimed: query.claimed,
          answered: body.category,
        });
      }
      if (this.pending.length === 0) {
        this.completeIteration();
      }
      return respond(200, { ok: true });
    }
    if (input.endsWith("/api/categories")) {
      const body = JSON.parse(init.body ?? "{}") as { name?: string };
      if (!body.name) {
        return respond(422, { error: "empty category name" });
      }
      if (!this.extraCategories.includes(body.name)) {
        this.extraCategories.push(body.name);
      }
      return respond(200, { ok: true, name: body.name });
    }
    return respond(404, { error: "no such route" });
  };

  /** The engine iteration unblocks once its whole batch is answered. */
  private completeIteration(): void {
    const last = this.metrics[this.metrics.length - 1];
    this.metrics.push({
      ...last,
      t: last.t + 1,
      answered: this.answers.length,
      corrections: this.corrections.length,
      annotated_total: last.annotated_total + this.answers.length,
    });
    this.status = { ...this.status, iteration: this.status.iteration + 1 };
  }
}
