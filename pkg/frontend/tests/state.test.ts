import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { ConsoleStore } from "../src/state.js";
import { FakeService } from "./harness.js";

function makeStore(service: FakeService): ConsoleStore {
  return new ConsoleStore(new ApiClient("", service.fetch));
}

describe("polling", () => {
  it("syncs status, cards, and metrics from the service", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    expect(snap.status?.iteration).toBe(service.status.iteration);
    expect(snap.cards).toHaveLength(3);
    expect(snap.metrics).toHaveLength(2);
    expect(snap.stale).toBe(false);
  });

  it("keeps cached state and raises the stale flag when the service drops", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    await store.poll();
    service.down = true;
    const snap = await store.poll();
    expect(snap.stale).toBe(true);
    expect(snap.cards).toHaveLength(3);    // cached, not cleared
    expect(snap.metrics).toHaveLength(2);
    service.down = false;
    expect((await store.poll()).stale).toBe(false);
  });
});

describe("submission", () => {
  it("removes the card on success", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    const card = snap.cards[0];
    const result = await store.submit(card.sample_id, card.candidates[0].name);
    expect(result).toBe("applied");
    expect(store.snapshot().cards.map((c) => c.sample_id)).not.toContain(card.sample_id);
    expect(service.answers).toEqual([
      { sample_id: card.sample_id, category: card.candidates[0].name },
    ]);
  });

  it("drops the card and resyncs on a 409 conflict", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    const card = snap.cards[0];
    // the query vanishes server-side before we answer
    service.pending = service.pending.filter((q) => q.sample_id !== card.sample_id);
    const result = await store.submit(card.sample_id, "unknown");
    expect(result).toBe("conflict");
    expect(store.snapshot().cards.map((c) => c.sample_id)).not.toContain(card.sample_id);
    const after = await store.poll();
    expect(after.cards).toHaveLength(2);
  });

  it("rejects a category the engine does not know", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    const result = await store.submit(snap.cards[0].sample_id, "martian");
    expect(result).toBe("rejected");
    expect(store.snapshot().cards).toHaveLength(3);  // card stays
  });

  it("blocks double submission client-side", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    const card = snap.cards[0];
    const [first, second] = await Promise.all([
      store.submit(card.sample_id, card.candidates[0].name),
      store.submit(card.sample_id, card.candidates[1].name),
    ]);
    expect([first, second].sort()).toEqual(["applied", "conflict"]);
    expect(service.answers).toHaveLength(1);
  });
});

describe("new-class flow", () => {
  it("registers the category before answering, in order", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    const result = await store.submitNewClass(snap.cards[0].sample_id, "carol");
    expect(result).toBe("applied");
    const mutations = service.requestLog.filter((r) => r.startsWith("POST"));
    expect(mutations).toEqual(["POST /api/categories", "POST /api/labels"]);
    expect(service.extraCategories).toContain("carol");
    expect(service.answers[0].category).toBe("new:carol");
  });
});

describe("verify cards", () => {
  it("confirm re-asserts the claimed category", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    const verify = snap.cards.find((c) => c.kind === "verify")!;
    expect(await store.confirm(verify)).toBe("applied");
    expect(service.answers[0]).toEqual({
      sample_id: verify.sample_id,
      category: verify.claimed,
    });
    expect(service.corrections).toHaveLength(0);
  });

  it("refuses to confirm a label card", async () => {
    const service = FakeService.fromFixtures();
    const store = makeStore(service);
    const snap = await store.poll();
    const label = snap.cards.find((c) => c.kind === "label")!;
    expect(await store.confirm(label)).toBe("rejected");
  });
});
