/** End-to-end scenario under the scripted harness (recorded fixtures):
 * a live-engine stand-in holds 3 pending queries; the console answers all
 * three, the engine iteration completes, /api/metrics gains a record, and
 * the verify-card correction lands in the corrections ledger. */
import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { ConsoleStore } from "../src/state.js";
import { renderConsole } from "../src/render.js";
import { FakeService } from "./harness.js";

describe("annotation session end to end", () => {
  it("answers all pending queries and the iteration completes", async () => {
    const service = FakeService.fromFixtures();
    const store = new ConsoleStore(new ApiClient("", service.fetch));

    let snap = await store.poll();
    expect(snap.cards).toHaveLength(3);
    const recordsBefore = snap.metrics.length;

    // answer every card the way a human would: top-scoring category for
    // label cards, a correcting answer for the verify card
    for (const card of snap.cards) {
      if (card.kind === "verify") {
        const best = [...card.candidates].sort((a, b) => b.score - a.score)[0];
        const correction =
          best.name === card.claimed
            ? card.candidates.find((c) => c.name !== card.claimed)!.name
            : best.name;
        expect(await store.submit(card.sample_id, correction)).toBe("applied");
      } else {
        const best = [...card.candidates].sort((a, b) => b.score - a.score)[0];
        expect(await store.submit(card.sample_id, best.name)).toBe("applied");
      }
    }

    snap = await store.poll();
    expect(snap.cards).toHaveLength(0);                      // queue drained
    expect(snap.metrics).toHaveLength(recordsBefore + 1);    // iteration landed
    expect(snap.status?.iteration).toBeGreaterThan(0);

    // the corrected verification is observable in the ledger
    expect(service.corrections).toHaveLength(1);
    expect(snap.metrics[snap.metrics.length - 1].corrections).toBe(1);

    // and the idle console renders from the fresh state without errors
    const html = renderConsole(snap);
    expect(html).toContain("no pending queries");
  });

  it("a full session survives a mid-run outage", async () => {
    const service = FakeService.fromFixtures();
    const store = new ConsoleStore(new ApiClient("", service.fetch));
    let snap = await store.poll();
    const first = snap.cards[0];
    await store.submit(first.sample_id, first.candidates[0].name);

    service.down = true;
    snap = await store.poll();
    expect(snap.stale).toBe(true);
    expect(renderConsole(snap)).toContain("service unreachable");

    service.down = false;
    snap = await store.poll();
    expect(snap.stale).toBe(false);
    expect(snap.cards).toHaveLength(2);
    for (const card of snap.cards) {
      await store.submit(card.sample_id, "unknown");
    }
    expect((await store.poll()).cards).toHaveLength(0);
  });
});
