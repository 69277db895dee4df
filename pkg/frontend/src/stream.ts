// Transport: prefetch /history, then tail the /events NDJSON stream.
// Reconnects with exponential backoff; the store dedupes the overlap.

import { SessionStore } from "./session.js";
import { Frame } from "./types.js";

const BACKOFF_START_S = 1;
const BACKOFF_MAX_S = 15;

export class EventStream {
  private stopped = false;
  private backoffS = BACKOFF_START_S;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private baseUrl: string,
    private store: SessionStore,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  start(): void {
    this.stopped = false;
    void this.connectOnce();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
  }

  private async connectOnce(): Promise<void> {
    this.store.setState("connecting");
    try {
      const history = await this.fetchImpl(this.baseUrl + "/history");
      if (!history.ok) throw new Error(`history: HTTP ${history.status}`);
      const frames = (await history.json()) as Frame[];
      this.store.setState("replaying");
      for (const frame of frames) this.store.ingest(frame);

      const response = await this.fetchImpl(this.baseUrl + "/events");
      if (!response.ok || !response.body) {
        throw new Error(`events: HTTP ${response.status}`);
      }
      this.store.setState("live");
      this.backoffS = BACKOFF_START_S;
      await this.readLines(response.body);
      if (!this.stopped) this.store.setState("ended");
    } catch (err) {
      if (this.stopped) return;
      const wait = this.backoffS;
      this.backoffS = Math.min(this.backoffS * 2, BACKOFF_MAX_S);
      this.store.setState("error", String(err), wait);
      this.timer = setTimeout(() => void this.connectOnce(), wait * 1000);
    }
  }

  private async readLines(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let nl;
      while ((nl = buffer.indexOf("\n")) >= 0) {
        this.store.ingestLine(buffer.slice(0, nl));
        buffer = buffer.slice(nl + 1);
      }
    }
    this.store.ingestLine(buffer);
  }
}
