"""Vocal isolation by repeating-pattern modeling and Wiener soft masks.

The accompaniment of a song repeats; the voice does not. For every STFT
frame we find its most similar frames elsewhere in the piece, take their
per-bin median as the repeating (background) model, constrain it to never
exceed the mixture, and turn it into a soft mask. Masked resynthesis with
the mixture phase gives a background (accompaniment/noise) channel and the
complementary foreground (voice) channel that sum back to the input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioClip
from .dsp import Spectrogram, StftConfig, TooShortError, istft, stft

WIENER_EPS = 1e-12


@dataclass(frozen=True)
class SeparationConfig:
    # Smaller hop than the feature STFT: finer time resolution for masking.
    stft: StftConfig = StftConfig(n_fft=2048, hop=256)
    k_neighbors: int = 100
    # None: use one second worth of frames. A 1-frame gap lets a sustained
    # foreground note vote itself into the median and ruins the separation.
    min_frame_gap: int | None = None
    similarity_floor: float = 0.0
    wiener_power: float = 2.0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be at least 1")
        if self.min_frame_gap is not None and self.min_frame_gap < 0:
            raise ValueError("min_frame_gap must be nonnegative")
        if not 0.0 <= self.similarity_floor <= 1.0:
            raise ValueError("similarity_floor must be in [0, 1]")
        if self.wiener_power <= 0:
            raise ValueError("wiener_power must be positive")

    def frame_gap(self, rate_hz: int | None = None) -> int:
        if self.min_frame_gap is not None:
            return self.min_frame_gap
        if rate_hz is None:
            return 1
        return int(round(rate_hz / self.stft.hop))


@dataclass(frozen=True)
class SeparationResult:
    foreground: AudioClip  # voice
    background: AudioClip  # accompaniment / noise
    mask: np.ndarray       # background mask, bins x frames, in [0, 1]


def similarity_matrix(mag: np.ndarray) -> np.ndarray:
    """Cosine similarity between magnitude frames (columns).

    Zero frames are defined to have similarity 0 with everything and 1 with
    themselves, so silence never gets picked as anyone's neighbor.
    """
    mag = np.asarray(mag, dtype=np.float64)
    if mag.ndim != 2 or mag.shape[1] < 2:
        raise ValueError("need a bins x frames matrix with at least 2 frames")
    norms = np.sqrt(np.sum(mag * mag, axis=0))
    zero = norms == 0.0
    unit = mag / np.where(zero, 1.0, norms)
    sim = unit.T @ unit
    sim[zero, :] = 0.0
    sim[:, zero] = 0.0
    np.fill_diagonal(sim, 1.0)
    return np.clip(sim, -1.0, 1.0)


def repeating_model(
    mag: np.ndarray, sim: np.ndarray, cfg: SeparationConfig, rate_hz: int | None = None
) -> np.ndarray:
    """Per-bin median over each frame's most similar frames, capped by the mixture.

    For frame j the candidates are frames at least `min_frame_gap` away with
    similarity above the floor; j itself always participates. The model never
    exceeds the mixture magnitude (the repeating part cannot carry more
    energy than the whole).
    """
    mag = np.asarray(mag, dtype=np.float64)
    n_frames = mag.shape[1]
    gap = cfg.frame_gap(rate_hz)
    k = min(cfg.k_neighbors, n_frames)
    idx = np.arange(n_frames)
    model = np.empty_like(mag)
    for j in range(n_frames):
        score = sim[:, j].astype(np.float64, copy=True)
        near = (np.abs(idx - j) <= gap) & (idx != j)
        score[near] = -np.inf
        score[(score < cfg.similarity_floor) & (idx != j)] = -np.inf
        score[j] = np.inf  # the frame itself is always eligible
        neighbors = np.argsort(-score, kind="stable")[:k]
        neighbors = neighbors[np.isfinite(score[neighbors]) | (neighbors == j)]
        model[:, j] = np.median(mag[:, neighbors], axis=1)
    return np.minimum(model, mag)


def wiener_soft_mask(model: np.ndarray, mag: np.ndarray, p: float = 2.0) -> np.ndarray:
    """Soft background mask model^p / (model^p + (mag - model)^p + eps)."""
    model = np.asarray(model, dtype=np.float64)
    mag = np.asarray(mag, dtype=np.float64)
    mp = model ** p
    residual = np.maximum(mag - model, 0.0) ** p
    return mp / (mp + residual + WIENER_EPS)


def separate_vocals(clip: AudioClip, cfg: SeparationConfig = SeparationConfig()) -> SeparationResult:
    """Split a clip into foreground (voice) and background (accompaniment).

    Both channels reuse the mixture phase and have exactly the input length;
    since the two masks sum to 1 per bin, foreground + background
    reconstructs the input within ISTFT round-trip tolerance.
    """
    try:
        spec = stft(clip, cfg.stft)
    except TooShortError as exc:
        raise TooShortError(f"clip too short to separate: {exc}") from exc
    if spec.n_frames < 2:
        raise TooShortError("separation needs at least 2 STFT frames")
    mag = spec.magnitude()
    sim = similarity_matrix(mag)
    model = repeating_model(mag, sim, cfg, rate_hz=clip.sample_rate_hz)
    mask = wiener_soft_mask(model, mag, cfg.wiener_power)
    background_spec = Spectrogram(
        bins=mask * spec.bins, config=cfg.stft, source_rate_hz=clip.sample_rate_hz
    )
    foreground_spec = Spectrogram(
        bins=(1.0 - mask) * spec.bins, config=cfg.stft, source_rate_hz=clip.sample_rate_hz
    )
    background = istft(background_spec, length=len(clip))
    foreground = istft(foreground_spec, length=len(clip))
    return SeparationResult(foreground=foreground, background=background, mask=mask)
