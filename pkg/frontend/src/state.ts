/** Console state machine: pending cards, submissions, metrics cache.
 *
 * Pure logic, no DOM: the renderer consumes snapshots of this store and the
 * tests drive it directly against recorded API fixtures.
 */

import { ApiClient, MetricRecord, QueryCard, StatusInfo } from "./api.js";

export interface ConsoleSnapshot {
  status: StatusInfo | null;
  cards: QueryCard[];
  metrics: MetricRecord[];
  /** sample_ids with an in-flight mutation; their cards are locked. */
  inFlight: string[];
  /** true when the last poll failed; cached state stays on screen. */
  stale: boolean;
}

export type SubmitResult = "applied" | "conflict" | "rejected";

export class ConsoleStore {
  private status: StatusInfo | null = null;
  private cards: QueryCard[] = [];
  private metrics: MetricRecord[] = [];
  private inFlight = new Set<string>();
  private stale = false;

  constructor(private readonly api: ApiClient) {}

  snapshot(): ConsoleSnapshot {
    return {
      status: this.status,
      cards: [...this.cards],
      metrics: [...this.metrics],
      inFlight: [...this.inFlight],
      stale: this.stale,
    };
  }

  /** One polling round: status, queries, metrics.  A failure flips the
   *  stale banner but never clears cached state. */
  async poll(): Promise<ConsoleSnapshot> {
    try {
      const [status, queries, metrics] = await Promise.all([
        this.api.getStatus(),
        this.api.getQueries(),
        this.api.getMetrics(),
      ]);
      this.status = status;
      // keep cards the user is mid-submission on, even if the server
      // momentarily stops listing them
      const keep = this.cards.filter(
        (c) => this.inFlight.has(c.sample_id) &&
          !queries.some((q) => q.sample_id === c.sample_id)
      );
      this.cards = [...queries, ...keep];
      this.metrics = metrics;
      this.stale = false;
    } catch {
      this.stale = true;
    }
    return this.snapshot();
  }

  /** Answer a card.  Double submission is blocked client-side; a 409 from
   *  the server drops the card so the next poll re-syncs. */
  async submit(sampleId: string, category: string): Promise<SubmitResult> {
    if (this.inFlight.has(sampleId)) {
      return "conflict";
    }
    this.inFlight.add(sampleId);
    try {
      const status = await this.api.postLabel(sampleId, category);
      if (status === 200) {
        this.cards = this.cards.filter((c) => c.sample_id !== sampleId);
        return "applied";
      }
      if (status === 409) {
        this.cards = this.cards.filter((c) => c.sample_id !== sampleId);
        return "conflict";
      }
      return "rejected";
    } finally {
      this.inFlight.delete(sampleId);
    }
  }

  /** Two-step new-class flow: register the name, then answer "new:<name>". */
  async submitNewClass(sampleId: string, name: string): Promise<SubmitResult> {
    const status = await this.api.postCategory(name);
    if (status !== 200) {
      return "rejected";
    }
    return this.submit(sampleId, `new:${name}`);
  }

  /** Confirm a verify card: re-assert the claimed category. */
  async confirm(card: QueryCard): Promise<SubmitResult> {
    if (card.kind !== "verify" || card.claimed === null) {
      return "rejected";
    }
    return this.submit(card.sample_id, card.claimed);
  }
}
