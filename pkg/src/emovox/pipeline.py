"""Segment-wise emotion reports: the one classification path shared by the
offline predict command and the realtime loop.

Offline/realtime parity is a design invariant: both surfaces slice audio
into windows and hand each window to :func:`classify_clip`, so a replayed
file can never be labeled differently live than it is on disk.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import dsp, nn
from .audio import AudioClip, multiple_split
from .labels import EmotionLabel

REPORT_HEADER = "offset_s,label,p_neutral,p_calm,p_happy,p_sad,p_angry,p_fearful"
TOO_SHORT_MARKER = "too_short"


@dataclass(frozen=True)
class SegmentRow:
    offset_s: float
    prediction: nn.Prediction | None  # None: segment under one analysis frame

    @property
    def too_short(self) -> bool:
        return self.prediction is None


@dataclass
class SegmentReport:
    rows: list
    source: str
    segment_s: float
    isolated: bool


def classify_clip(
    clip: AudioClip, model: nn.Model, cfg: dsp.FeatureConfig = dsp.DEFAULT_FEATURES
) -> nn.Prediction | None:
    """Predict one clip; None when it is too short to analyze honestly."""
    if len(clip) < cfg.min_samples(clip.sample_rate_hz):
        return None
    return nn.predict(model, dsp.feature_vector(clip, cfg))


def classify_segments(
    clip: AudioClip,
    model: nn.Model,
    segment_s: float,
    cfg: dsp.FeatureConfig = dsp.DEFAULT_FEATURES,
    source: str = "",
    isolated: bool = False,
) -> SegmentReport:
    """Split a clip into back-to-back segments and classify each one."""
    rows = []
    for i, segment in enumerate(multiple_split(clip, segment_s)):
        rows.append(
            SegmentRow(offset_s=i * segment_s, prediction=classify_clip(segment, model, cfg))
        )
    return SegmentReport(rows=rows, source=source, segment_s=segment_s, isolated=isolated)


def report_to_csv(report: SegmentReport, path=None) -> str:
    """CSV with one row per segment, probabilities at 9 significant digits."""
    buf = io.StringIO()
    buf.write(REPORT_HEADER + "\n")
    for row in report.rows:
        if row.too_short:
            buf.write(f"{row.offset_s:.9g},{TOO_SHORT_MARKER},,,,,,\n")
        else:
            probs = ",".join(f"{p:.9g}" for p in row.prediction.probabilities)
            buf.write(f"{row.offset_s:.9g},{row.prediction.label.label_name},{probs}\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_report_csv(text: str) -> list:
    """Rows back out of the CSV; inverse of report_to_csv for the data part."""
    lines = text.strip().splitlines()
    if not lines or lines[0] != REPORT_HEADER:
        raise ValueError("not a segment report CSV")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        offset = float(parts[0])
        if parts[1] == TOO_SHORT_MARKER:
            rows.append(SegmentRow(offset_s=offset, prediction=None))
        else:
            probs = np.array([float(p) for p in parts[2:8]])
            rows.append(
                SegmentRow(
                    offset_s=offset,
                    prediction=nn.Prediction(
                        label=EmotionLabel.from_name(parts[1]), probabilities=probs
                    ),
                )
            )
    return rows


def labels_of(report: SegmentReport) -> list:
    """Label names in offset order; too-short rows map to the marker string."""
    return [
        TOO_SHORT_MARKER if row.too_short else row.prediction.label.label_name
        for row in report.rows
    ]
