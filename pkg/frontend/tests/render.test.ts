import { describe, expect, it } from "vitest";
import { MetricRecord, QueryCard, StatusInfo } from "../src/api.js";
import {
  renderCard,
  renderChart,
  renderConsole,
  renderInbox,
  renderMetricsPanel,
  renderStatusBar,
} from "../src/render.js";
import { FakeService, loadFixture } from "./harness.js";

const queries = loadFixture<QueryCard[]>("queries.json");
const metrics = loadFixture<MetricRecord[]>("metrics.json");
const status = loadFixture<StatusInfo>("status.json");

describe("status bar", () => {
  it("shows iteration, counts, and accuracy from the response", () => {
    const html = renderStatusBar(status, false);
    expect(html).toContain(`iteration ${status.iteration}`);
    expect(html).toContain(`${status.annotated} annotated`);
    expect(html).toContain((status.accuracy as number).toFixed(3));
    expect(html).not.toContain("stale");
  });

  it("raises the stale banner without hiding cached facts", () => {
    const html = renderStatusBar(status, true);
    expect(html).toContain("service unreachable");
    expect(html).toContain(`iteration ${status.iteration}`);
  });
});

describe("query cards", () => {
  const label = queries.find((q) => q.kind === "label")!;
  const verify = queries.find((q) => q.kind === "verify")!;

  it("renders one button per candidate plus unknown and new-class", () => {
    const html = renderCard(label, false);
    for (const candidate of label.candidates) {
      expect(html).toContain(`data-category="${candidate.name}"`);
    }
    expect(html).toContain(`data-category="unknown"`);
    expect(html).toContain("new class…");
    expect(html).not.toContain("confirm");
  });

  it("verify cards carry the claimed category and a confirm affordance", () => {
    const html = renderCard(verify, false);
    expect(html).toContain(`verify`);
    expect(html).toContain(verify.claimed as string);
    expect(html).toContain(`class="confirm"`);
  });

  it("locked cards disable every button", () => {
    const html = renderCard(label, true);
    const buttons = html.match(/<button/g) ?? [];
    const disabled = html.match(/ disabled/g) ?? [];
    expect(disabled).toHaveLength(buttons.length);
  });

  it("escapes markup in server-provided strings", () => {
    const hostile: QueryCard = {
      ...label,
      sample_id: `<img src=x onerror=alert(1)>`,
    };
    const html = renderCard(hostile, false);
    expect(html).not.toContain("<img");
    expect(html).toContain("&lt;img");
  });
});

describe("inbox", () => {
  it("empty queue renders the idle state with iteration status", () => {
    const snapshot = {
      status,
      cards: [],
      metrics,
      inFlight: [],
      stale: false,
    };
    const html = renderInbox(snapshot);
    expect(html).toContain("no pending queries");
    expect(html).toContain(`iteration ${status.iteration}`);
  });

  it("renders every pending card", () => {
    const snapshot = {
      status,
      cards: queries,
      metrics,
      inFlight: [],
      stale: false,
    };
    const html = renderInbox(snapshot);
    for (const q of queries) {
      expect(html).toContain(`data-sample="${q.sample_id}"`);
    }
  });
});

describe("metrics panel", () => {
  it("renders no points and no errors on an empty ledger", () => {
    const html = renderMetricsPanel([]);
    expect(html).toContain("chart empty");
    expect(html).not.toContain("<circle");
  });

  it("renders one chart point per ledger record", () => {
    const html = renderChart(metrics.map((r) => ({ x: r.t, y: r.rank1 })), "accuracy");
    const points = html.match(/<circle/g) ?? [];
    expect(points).toHaveLength(metrics.length);
  });

  it("panel charts accuracy, demand, and pseudo-error", () => {
    const html = renderMetricsPanel(metrics);
    expect(html).toContain("accuracy vs annotations");
    expect(html).toContain("annotations requested per iteration");
    expect(html).toContain("pseudo-label error");
  });
});

describe("console composition", () => {
  it("every rendered fact traces to a service response", () => {
    const service = FakeService.fromFixtures();
    const snapshot = {
      status: service.status,
      cards: service.pending,
      metrics: service.metrics,
      inFlight: [],
      stale: false,
    };
    const html = renderConsole(snapshot);
    for (const card of service.pending) {
      expect(html).toContain(card.sample_id);
    }
    expect(html).toContain(`iteration ${service.status.iteration}`);
  });
});
