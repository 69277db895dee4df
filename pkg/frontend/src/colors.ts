// Fixed label colors, shared by the current-emotion panel, the timeline,
// and the exported legend. Documented here once; do not restyle per view.

import { LabelName } from "./types.js";

export const LABEL_COLORS: Record<LabelName, string> = {
  neutral: "#9e9e9e",
  calm: "#4fc3f7",
  happy: "#ffd54f",
  sad: "#7986cb",
  angry: "#e57373",
  fearful: "#ba68c8",
};

export const TOO_SHORT_COLOR = "#37474f";
export const GAP_COLOR = "#ff8a65";

const DB_MIN = -100;
const DB_MAX = 0;

// Three-stop gradient (deep blue -> magenta -> yellow) on the fixed dB scale.
const STOPS: [number, number, number][] = [
  [10, 10, 40],
  [190, 40, 110],
  [252, 225, 80],
];

export function dbToColor(db: number): string {
  const x = Math.min(1, Math.max(0, (db - DB_MIN) / (DB_MAX - DB_MIN)));
  const pos = x * (STOPS.length - 1);
  const i = Math.min(STOPS.length - 2, Math.floor(pos));
  const f = pos - i;
  const ch = STOPS[i].map((a, k) => Math.round(a + (STOPS[i + 1][k] - a) * f));
  return `rgb(${ch[0]},${ch[1]},${ch[2]})`;
}

export function melFrameColors(frame: number[]): string[] {
  return frame.map(dbToColor);
}
