// Dashboard wiring: one store, one stream, DOM panels re-rendered on change.

import { melFrameColors } from "./colors.js";
import { eventsToCsv } from "./csv.js";
import {
  renderCurrentHtml,
  renderDetailHtml,
  renderLegendHtml,
  renderStatusHtml,
  renderTimelineHtml,
} from "./render.js";
import { SessionStore } from "./session.js";
import { EventStream } from "./stream.js";

const $ = (id: string) => document.getElementById(id)!;

const store = new SessionStore();
let stream: EventStream | null = null;

const spectrogram = $("spectrogram") as HTMLCanvasElement;
const spectroCtx = spectrogram.getContext("2d")!;
let paintedSeqs = new Set<number>();

function paintSpectrogram(): void {
  // Append one column per event that carries a mel frame; when frames are
  // missing the strip simply pauses (no column, no error).
  const columnWidth = 4;
  for (const event of store.events) {
    if (paintedSeqs.has(event.seq) || !event.melFrame) continue;
    paintedSeqs.add(event.seq);
    const colors = melFrameColors(event.melFrame);
    const x = (event.seq * columnWidth) % spectrogram.width;
    const bandH = spectrogram.height / colors.length;
    for (let b = 0; b < colors.length; b++) {
      spectroCtx.fillStyle = colors[b];
      // band 0 (lowest) at the bottom
      spectroCtx.fillRect(x, spectrogram.height - (b + 1) * bandH, columnWidth, Math.ceil(bandH));
    }
  }
}

function redraw(): void {
  $("status").innerHTML = renderStatusHtml(store);
  $("current").innerHTML = renderCurrentHtml(store.latest());
  $("timeline").innerHTML = renderTimelineHtml(store);
  $("detail").innerHTML = renderDetailHtml(store.selected());
  paintSpectrogram();
}

$("timeline").addEventListener("click", (ev) => {
  const target = (ev.target as HTMLElement).closest(".cell[data-seq]");
  if (!target) return;
  store.selectedSeq = Number((target as HTMLElement).dataset.seq);
  redraw();
});

$("export").addEventListener("click", () => {
  const blob = new Blob([eventsToCsv(store.events)], { type: "text/csv" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "session_report.csv";
  a.click();
  URL.revokeObjectURL(a.href);
});

$("connect").addEventListener("click", () => {
  stream?.stop();
  paintedSeqs = new Set();
  spectroCtx.clearRect(0, 0, spectrogram.width, spectrogram.height);
  const endpoint = ($("endpoint") as HTMLInputElement).value.replace(/\/+$/, "");
  stream = new EventStream(endpoint, store);
  stream.start();
});

$("legend").innerHTML = renderLegendHtml();
store.onChange(redraw);
redraw();
