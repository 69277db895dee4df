// Session state: events ordered by sequence number regardless of arrival
// jitter, gap markers kept explicit, duplicates (history overlap) dropped.

import { ConnectionState, Frame, GapFrame, PredictionFrame, isGap } from "./types.js";

export interface GapMark {
  afterSeq: number; // gap announced after this sequence number (-1: at start)
  dropped: number;
}

export class SessionStore {
  events: PredictionFrame[] = [];
  gaps: GapMark[] = [];
  state: ConnectionState = "connecting";
  lastError: string | null = null;
  retryInSeconds: number | null = null;
  selectedSeq: number | null = null;
  private seen = new Set<number>();
  private listeners: (() => void)[] = [];

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  setState(state: ConnectionState, error: string | null = null, retryIn: number | null = null): void {
    this.state = state;
    this.lastError = error;
    this.retryInSeconds = retryIn;
    this.notify();
  }

  ingestLine(line: string): void {
    const trimmed = line.trim();
    if (!trimmed) return;
    let frame: Frame;
    try {
      frame = JSON.parse(trimmed) as Frame;
    } catch {
      console.warn("ignoring malformed event line:", trimmed.slice(0, 120));
      return;
    }
    this.ingest(frame);
  }

  ingest(frame: Frame): void {
    if (isGap(frame)) {
      this.gaps.push({ afterSeq: this.maxSeq(), dropped: (frame as GapFrame).dropped });
      this.notify();
      return;
    }
    if (frame.error !== undefined) {
      this.setState("error", frame.error);
      return;
    }
    if (typeof frame.seq !== "number" || this.seen.has(frame.seq)) return;
    this.seen.add(frame.seq);
    // insert in sequence order; arrival order is not trusted
    let lo = 0;
    let hi = this.events.length;
    while (lo < hi) {
      const mid = (lo + hi) >> 1;
      if (this.events[mid].seq < frame.seq) lo = mid + 1;
      else hi = mid;
    }
    this.events.splice(lo, 0, frame);
    this.notify();
  }

  latest(): PredictionFrame | null {
    return this.events.length ? this.events[this.events.length - 1] : null;
  }

  selected(): PredictionFrame | null {
    if (this.selectedSeq === null) return this.latest();
    return this.events.find((e) => e.seq === this.selectedSeq) ?? null;
  }

  private maxSeq(): number {
    return this.events.length ? this.events[this.events.length - 1].seq : -1;
  }
}
