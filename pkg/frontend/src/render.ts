/** HTML renderers: pure string producers so they snapshot-test cleanly.
 *
 * Every rendered fact comes from a service response carried in the
 * ConsoleSnapshot; nothing is fabricated client-side.
 */

import { MetricRecord, QueryCard, StatusInfo } from "./api.js";
import { ConsoleSnapshot } from "./state.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderStatusBar(status: StatusInfo | null, stale: boolean): string {
  if (status === null) {
    return `<div class="status">connecting…</div>`;
  }
  const accuracy = status.accuracy === null ? "–" : status.accuracy.toFixed(3);
  const banner = stale ? `<span class="stale">service unreachable — showing cached state</span>` : "";
  const error = status.error ? `<span class="error">${escapeHtml(status.error)}</span>` : "";
  return (
    `<div class="status">iteration ${status.iteration} · ` +
    `${status.categories.length} categories · ` +
    `${status.annotated} annotated · ${status.pseudo} pseudo · ` +
    `accuracy ${accuracy} ${banner}${error}</div>`
  );
}

export function renderCard(card: QueryCard, locked: boolean): string {
  const title =
    card.kind === "verify"
      ? `verify: is <b>${escapeHtml(card.sample_id)}</b> really ` +
        `<b>${escapeHtml(card.claimed ?? "?")}</b>?`
      : `label <b>${escapeHtml(card.sample_id)}</b>`;
  const ranked = [...card.candidates].sort((a, b) => b.score - a.score);
  const buttons = ranked
    .map(
      (c) =>
        `<button class="answer" data-sample="${escapeHtml(card.sample_id)}" ` +
        `data-category="${escapeHtml(c.name)}"${locked ? " disabled" : ""}>` +
        `${escapeHtml(c.name)} <span class="score">${c.score.toFixed(2)}</span></button>`
    )
    .join("");
  const confirm =
    card.kind === "verify"
      ? `<button class="confirm" data-sample="${escapeHtml(card.sample_id)}"` +
        `${locked ? " disabled" : ""}>confirm ${escapeHtml(card.claimed ?? "")}</button>`
      : "";
  return (
    `<div class="card ${card.kind}${locked ? " locked" : ""}" ` +
    `data-sample="${escapeHtml(card.sample_id)}">` +
    `<div class="title">${title}</div>` +
    `<div class="candidates">${confirm}${buttons}` +
    `<button class="answer unknown" data-sample="${escapeHtml(card.sample_id)}" ` +
    `data-category="unknown"${locked ? " disabled" : ""}>unknown</button>` +
    `<button class="new-class" data-sample="${escapeHtml(card.sample_id)}"` +
    `${locked ? " disabled" : ""}>new class…</button>` +
    `</div>` +
    `<div class="features">[${card.feature_summary.map((x) => x.toFixed(2)).join(", ")}]</div>` +
    `</div>`
  );
}

export function renderInbox(snapshot: ConsoleSnapshot): string {
  if (snapshot.cards.length === 0) {
    const t = snapshot.status ? `iteration ${snapshot.status.iteration}` : "waiting";
    return `<div class="idle">no pending queries — engine running (${t})</div>`;
  }
  const locked = new Set(snapshot.inFlight);
  return snapshot.cards
    .map((card) => renderCard(card, locked.has(card.sample_id)))
    .join("");
}

/** Inline SVG polyline chart; one point per ledger record. */
export function renderChart(
  points: Array<{ x: number; y: number }>,
  title: string,
  width = 360,
  height = 160
): string {
  if (points.length === 0) {
    return `<figure class="chart empty"><figcaption>${escapeHtml(title)}</figcaption></figure>`;
  }
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys, 0);
  const yMax = Math.max(...ys, 1e-9);
  const sx = (x: number) =>
    xMax === xMin ? width / 2 : ((x - xMin) / (xMax - xMin)) * (width - 20) + 10;
  const sy = (y: number) => height - 10 - ((y - yMin) / (yMax - yMin)) * (height - 20);
  const path = points.map((p) => `${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`).join(" ");
  const dots = points
    .map((p) => `<circle class="pt" cx="${sx(p.x).toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="2"/>`)
    .join("");
  return (
    `<figure class="chart"><svg viewBox="0 0 ${width} ${height}">` +
    `<polyline fill="none" points="${path}"/>${dots}</svg>` +
    `<figcaption>${escapeHtml(title)}</figcaption></figure>`
  );
}

export function renderMetricsPanel(metrics: MetricRecord[]): string {
  const accuracy = metrics.map((r) => ({ x: r.annotated_total, y: r.rank1 }));
  const demand = metrics.map((r) => ({ x: r.t, y: r.answered }));
  const pseudoError = metrics.map((r) => ({ x: r.t, y: r.pseudo_error }));
  return (
    `<div class="metrics">` +
    renderChart(accuracy, "accuracy vs annotations") +
    renderChart(demand, "annotations requested per iteration") +
    renderChart(pseudoError, "pseudo-label error") +
    `</div>`
  );
}

export function renderConsole(snapshot: ConsoleSnapshot): string {
  return (
    renderStatusBar(snapshot.status, snapshot.stale) +
    `<div class="inbox">${renderInbox(snapshot)}</div>` +
    renderMetricsPanel(snapshot.metrics)
  );
}
