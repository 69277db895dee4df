"""Realtime prediction loop: capture windows, classify, emit events.

Windows are back-to-back (hop = window), so event N covers the same samples
the offline report's row N covers. Every event carries the full probability
vector; a window too short to analyze is reported explicitly rather than
classified from garbage.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass


from . import dsp, nn
from .audio import CaptureError, CaptureSource, open_capture
from .pipeline import classify_clip

log = logging.getLogger(__name__)

EVENT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PredictionEvent:
    sequence: int
    timestamp_s: float
    window_s: float
    label: str | None = None            # None for too-short and error events
    probabilities: tuple | None = None  # 6 floats summing to 1
    too_short: bool = False
    mel_frame: tuple | None = None      # optional compact mel column for UIs
    error: str | None = None
    terminal: bool = False

    def to_json_obj(self) -> dict:
        obj = {
            "v": EVENT_SCHEMA_VERSION,
            "seq": self.sequence,
            "t": self.timestamp_s,
            "window_s": self.window_s,
        }
        if self.error is not None:
            obj["error"] = self.error
            obj["terminal"] = self.terminal
            return obj
        if self.too_short:
            obj["too_short"] = True
            return obj
        obj["label"] = self.label
        obj["probs"] = list(self.probabilities)
        if self.mel_frame is not None:
            obj["melFrame"] = list(self.mel_frame)
        return obj

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))


def _mel_summary(clip, n_bands: int = 64) -> tuple:
    """Coarse time-averaged log-mel column for the dashboard spectrogram."""
    try:
        mel = dsp.mel_spectrogram(
            clip, dsp.StftConfig(), dsp.MelConfig(n_mels=n_bands), log_scaled=True
        )
    except dsp.TooShortError:
        return tuple()
    return tuple(round(float(v), 2) for v in mel.energies.mean(axis=1))


def run_realtime(
    source: CaptureSource,
    window_s: float,
    model: nn.Model,
    cfg: dsp.FeatureConfig = dsp.DEFAULT_FEATURES,
    include_mel: bool = False,
    max_windows: int | None = None,
):
    """Yield one PredictionEvent per captured window until the source ends.

    File replays end the stream cleanly at EOF (the final partial window is
    still classified, mirroring the offline splitter's short last segment);
    a capture failure yields a terminal error event instead of raising.
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    stream = open_capture(source)
    sequence = 0
    position_s = 0.0
    try:
        while max_windows is None or sequence < max_windows:
            try:
                block = stream.read(window_s, allow_partial=True)
            except CaptureError as exc:
                log.error("capture failed at t=%.2fs: %s", position_s, exc)
                yield PredictionEvent(
                    sequence=sequence, timestamp_s=position_s, window_s=window_s,
                    error=str(exc), terminal=True,
                )
                return
            if block is None or len(block) == 0:
                return  # replay exhausted: normal end of session
            prediction = classify_clip(block, model, cfg)
            if prediction is None:
                yield PredictionEvent(
                    sequence=sequence, timestamp_s=position_s, window_s=window_s,
                    too_short=True,
                )
            else:
                yield PredictionEvent(
                    sequence=sequence,
                    timestamp_s=position_s,
                    window_s=window_s,
                    label=prediction.label.label_name,
                    probabilities=tuple(float(p) for p in prediction.probabilities),
                    mel_frame=_mel_summary(block) if include_mel else None,
                )
            sequence += 1
            position_s += window_s
            if len(block) < int(round(window_s * stream.sample_rate_hz)):
                return  # partial final window: source is done
    finally:
        stream.close()
