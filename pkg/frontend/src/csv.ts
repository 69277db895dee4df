// Segment-report CSV: the exact schema the backend's predict command emits,
// so a dashboard export can be diffed against the server-side report.

import { g9 } from "./format.js";
import { LABEL_NAMES, PredictionFrame } from "./types.js";

export const REPORT_HEADER =
  "offset_s,label,p_neutral,p_calm,p_happy,p_sad,p_angry,p_fearful";
export const TOO_SHORT = "too_short";

export function eventsToCsv(events: PredictionFrame[]): string {
  const lines = [REPORT_HEADER];
  for (const e of events) {
    if (e.error !== undefined) continue; // transport artifact, not a row
    if (e.too_short) {
      lines.push(`${g9(e.t)},${TOO_SHORT},,,,,,`);
    } else {
      lines.push(`${g9(e.t)},${e.label},${e.probs!.map(g9).join(",")}`);
    }
  }
  return lines.join("\n") + "\n";
}

export interface CsvRow {
  offset_s: number;
  label: string | null; // null: too-short row
  probs: number[] | null;
}

export function parseReportCsv(text: string): CsvRow[] {
  const lines = text.trim().split("\n");
  if (lines[0] !== REPORT_HEADER) {
    throw new Error("not a segment report CSV");
  }
  return lines.slice(1).map((line) => {
    const parts = line.split(",");
    if (parts[1] === TOO_SHORT) {
      return { offset_s: Number(parts[0]), label: null, probs: null };
    }
    return {
      offset_s: Number(parts[0]),
      label: parts[1],
      probs: parts.slice(2, 2 + LABEL_NAMES.length).map(Number),
    };
  });
}
