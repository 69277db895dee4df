// View models and HTML builders. Pure functions of session state: every
// number shown comes straight from a received event field.

import { GAP_COLOR, LABEL_COLORS, TOO_SHORT_COLOR } from "./colors.js";
import { g9, percent } from "./format.js";
import { SessionStore } from "./session.js";
import { LABEL_NAMES, LabelName, PredictionFrame } from "./types.js";

export interface Bar {
  name: LabelName;
  value: number;
  color: string;
}

export function barModel(event: PredictionFrame | null): Bar[] {
  return LABEL_NAMES.map((name, i) => ({
    name,
    value: event?.probs ? event.probs[i] : 0,
    color: LABEL_COLORS[name],
  }));
}

export function renderCurrentHtml(event: PredictionFrame | null): string {
  if (event === null) {
    return `<div class="headline muted">waiting for events…</div>`;
  }
  if (event.too_short) {
    return (
      `<div class="headline muted">no reading</div>` +
      `<div class="sub">window at ${g9(event.t)}s too short to analyze</div>`
    );
  }
  const bars = barModel(event);
  const top = bars.reduce((a, b) => (b.value > a.value ? b : a));
  const rows = bars
    .map(
      (b) => `
  <div class="bar-row">
    <div class="bar-name">${b.name}</div>
    <div class="bar-track"><div class="bar-fill" style="width:${(b.value * 100).toFixed(2)}%;background:${b.color}"></div></div>
    <div class="bar-value">${percent(b.value)}</div>
  </div>`,
    )
    .join("");
  return (
    `<div class="headline" style="color:${top.color}">${top.name}` +
    `<span class="sub"> ${percent(top.value)} at t=${g9(event.t)}s</span></div>` +
    rows
  );
}

export interface TimelineCell {
  kind: "event" | "gap";
  seq: number; // for gaps: the seq the gap follows
  t: number | null;
  label: string | null;
  color: string;
  tooShort: boolean;
  dropped?: number;
}

export function timelineModel(store: SessionStore): TimelineCell[] {
  const cells: TimelineCell[] = [];
  const gapsAfter = new Map<number, number>();
  for (const gap of store.gaps) {
    gapsAfter.set(gap.afterSeq, (gapsAfter.get(gap.afterSeq) ?? 0) + gap.dropped);
  }
  const startGap = gapsAfter.get(-1);
  if (startGap) {
    cells.push({ kind: "gap", seq: -1, t: null, label: null, color: GAP_COLOR, tooShort: false, dropped: startGap });
  }
  for (const e of store.events) {
    cells.push({
      kind: "event",
      seq: e.seq,
      t: e.t,
      label: e.too_short ? null : (e.label ?? null),
      color: e.too_short ? TOO_SHORT_COLOR : LABEL_COLORS[e.label as LabelName] ?? TOO_SHORT_COLOR,
      tooShort: e.too_short === true,
    });
    const dropped = gapsAfter.get(e.seq);
    if (dropped) {
      cells.push({ kind: "gap", seq: e.seq, t: null, label: null, color: GAP_COLOR, tooShort: false, dropped });
    }
  }
  return cells;
}

export function renderTimelineHtml(store: SessionStore): string {
  const cells = timelineModel(store);
  if (cells.length === 0) {
    return `<div class="muted">no events yet - the timeline fills as the session runs</div>`;
  }
  return cells
    .map((c) =>
      c.kind === "gap"
        ? `<div class="cell gap" title="${c.dropped} events dropped (slow subscriber)">⚠${c.dropped}</div>`
        : `<div class="cell${c.seq === store.selectedSeq ? " selected" : ""}" data-seq="${c.seq}" ` +
          `style="background:${c.color}" title="t=${g9(c.t!)}s ${c.label ?? "too short"}"></div>`,
    )
    .join("");
}

export function renderDetailHtml(event: PredictionFrame | null): string {
  if (event === null) return `<div class="muted">select a cell to inspect it</div>`;
  if (event.too_short) {
    return `<div>t=${g9(event.t)}s - window too short, no probabilities</div>`;
  }
  const rows = LABEL_NAMES.map(
    (name, i) =>
      `<tr><td>${name}</td><td class="num">${g9(event.probs![i])}</td></tr>`,
  ).join("");
  return (
    `<div>t=${g9(event.t)}s, window ${g9(event.window_s)}s, seq ${event.seq}</div>` +
    `<table class="probs">${rows}</table>`
  );
}

export function renderStatusHtml(store: SessionStore): string {
  const labels: Record<string, string> = {
    connecting: "connecting…",
    replaying: "replaying history…",
    live: "live",
    ended: "session ended",
    error: "connection lost",
  };
  let text = labels[store.state] ?? store.state;
  if (store.state === "error" && store.retryInSeconds !== null) {
    text += ` - retrying in ${store.retryInSeconds}s`;
  }
  if (store.state === "error" && store.lastError) {
    text += ` (${store.lastError})`;
  }
  return `<span class="dot ${store.state}"></span>${text}`;
}

export function renderLegendHtml(): string {
  return LABEL_NAMES.map(
    (name) =>
      `<span class="legend-item"><span class="swatch" style="background:${LABEL_COLORS[name]}"></span>${name}</span>`,
  ).join("");
}
