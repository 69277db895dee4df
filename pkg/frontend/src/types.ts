// Wire format of the prediction service (one JSON object per NDJSON line).

export const LABEL_NAMES = [
  "neutral",
  "calm",
  "happy",
  "sad",
  "angry",
  "fearful",
] as const;

export type LabelName = (typeof LABEL_NAMES)[number];

export interface PredictionFrame {
  v: number;
  seq: number;
  t: number;
  window_s: number;
  label?: LabelName;
  probs?: number[];
  melFrame?: number[];
  too_short?: boolean;
  error?: string;
  terminal?: boolean;
}

export interface GapFrame {
  v: number;
  gap: true;
  dropped: number;
}

export type Frame = PredictionFrame | GapFrame;

export function isGap(frame: Frame): frame is GapFrame {
  return (frame as GapFrame).gap === true;
}

export type ConnectionState =
  | "connecting"
  | "replaying"
  | "live"
  | "ended"
  | "error";
