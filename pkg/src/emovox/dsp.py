"""Spectral analysis: FFT framing, STFT/ISTFT, cepstrum, mel features.

Everything here is a pure function of (samples, config). The canonical
analysis rate is 22,050 Hz; `feature_vector` resamples its input so that
dataset clips and live capture land in the same feature space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .audio import AudioClip, resample

CANONICAL_RATE_HZ = 22050
LOG_EPS = 1e-10           # keeps log power finite on silence
LOG_FLOOR_DB = 10.0 * np.log10(LOG_EPS)  # -100 dB


class TooShortError(ValueError):
    """Clip shorter than one analysis frame."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class StftConfig:
    n_fft: int = 2048
    hop: int = 512
    window: str = "hann"

    def __post_init__(self):
        if not _is_power_of_two(self.n_fft):
            raise ValueError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 0 < self.hop <= self.n_fft:
            raise ValueError(f"hop must be in (0, n_fft], got {self.hop}")
        if self.n_fft % self.hop != 0:
            # Hop dividing n_fft guarantees constant overlap-add with Hann.
            raise ValueError(f"hop {self.hop} must divide n_fft {self.n_fft}")
        if self.window != "hann":
            raise ValueError(f"unsupported window {self.window!r}")


@dataclass(frozen=True)
class Spectrogram:
    """One-sided complex STFT: (n_fft/2 + 1) bins x n_frames."""

    bins: np.ndarray
    config: StftConfig
    source_rate_hz: int

    def __post_init__(self):
        expected = self.config.n_fft // 2 + 1
        if self.bins.shape[0] != expected:
            raise ValueError(
                f"expected {expected} bins for n_fft {self.config.n_fft}, "
                f"got {self.bins.shape[0]}"
            )

    @property
    def n_frames(self) -> int:
        return self.bins.shape[1]

    def magnitude(self) -> np.ndarray:
        return np.abs(self.bins)


@dataclass(frozen=True)
class MelConfig:
    n_mels: int = 259
    f_min_hz: float = 0.0
    f_max_hz: float | None = None  # None: Nyquist of the analyzed clip


@dataclass(frozen=True)
class MelSpectrogram:
    energies: np.ndarray  # n_mels x n_frames
    log_scaled: bool
    mel_config: MelConfig


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    length: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.length,):
            raise ValueError(f"expected {self.length} values, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature vector contains non-finite values")
        object.__setattr__(self, "values", values)


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window (the COLA-friendly variant)."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def fft(frame, n: int) -> np.ndarray:
    """Forward DFT of a real frame zero-padded to n (power of two).

    No normalization on the forward transform.
    """
    if not _is_power_of_two(n):
        raise ValueError(f"n must be a power of two, got {n}")
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) > n:
        raise ValueError(f"frame of {len(frame)} samples exceeds n={n}")
    return np.fft.fft(frame, n)


def n_stft_frames(n_samples: int, cfg: StftConfig) -> int:
    """floor((count - n_fft)/hop) + 1; zero when the clip is too short."""
    if n_samples < cfg.n_fft:
        return 0
    return (n_samples - cfg.n_fft) // cfg.hop + 1


def stft(clip: AudioClip, cfg: StftConfig = StftConfig()) -> Spectrogram:
    """Hann-windowed one-sided STFT; frame t covers [t*hop, t*hop + n_fft)."""
    n_frames = n_stft_frames(len(clip), cfg)
    if n_frames == 0:
        raise TooShortError(
            f"clip of {len(clip)} samples is shorter than one {cfg.n_fft}-sample frame"
        )
    window = hann_window(cfg.n_fft)
    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, cfg.n_fft)
    frames = frames[:: cfg.hop][:n_frames]
    bins = np.fft.rfft(frames * window, axis=1).T
    return Spectrogram(bins=bins, config=cfg, source_rate_hz=clip.sample_rate_hz)


def istft(spec: Spectrogram, length: int | None = None) -> AudioClip:
    """Overlap-add resynthesis with window-square normalization.

    Inverts `stft` exactly away from the first/last frame; `length` pads or
    trims the tail so callers can match the original sample count.
    """
    cfg = spec.config
    window = hann_window(cfg.n_fft)
    frames = np.fft.irfft(spec.bins.T, n=cfg.n_fft, axis=1)
    n_frames = frames.shape[0]
    out_len = (n_frames - 1) * cfg.hop + cfg.n_fft
    out = np.zeros(out_len)
    wsum = np.zeros(out_len)
    windowed = frames * window
    wsq = window * window
    for t in range(n_frames):
        start = t * cfg.hop
        out[start:start + cfg.n_fft] += windowed[t]
        wsum[start:start + cfg.n_fft] += wsq
    covered = wsum > 1e-10
    out[covered] /= wsum[covered]
    if length is not None:
        if out_len < length:
            out = np.concatenate([out, np.zeros(length - out_len)])
        else:
            out = out[:length]
    return AudioClip(samples=out, sample_rate_hz=spec.source_rate_hz)


def power_cepstrum(frame, n: int) -> np.ndarray:
    """|IFFT(log(|FFT(frame)|^2 + eps))|^2 over n quefrency bins."""
    spectrum = fft(frame, n)
    log_power = np.log(np.abs(spectrum) ** 2 + LOG_EPS)
    return np.abs(np.fft.ifft(log_power)) ** 2


def mel_scale(f_hz):
    """Perceptual frequency in mels: 2595*log10(1 + f/700)."""
    f_hz = np.asarray(f_hz, dtype=np.float64)
    if np.any(f_hz < 0):
        raise ValueError("frequency must be nonnegative")
    out = 2595.0 * np.log10(1.0 + f_hz / 700.0)
    return float(out) if out.ndim == 0 else out


def mel_to_hz(mels):
    mels = np.asarray(mels, dtype=np.float64)
    out = 700.0 * (np.power(10.0, mels / 2595.0) - 1.0)
    return float(out) if out.ndim == 0 else out


def mel_filter_centers_hz(n_mels: int, f_min_hz: float, f_max_hz: float) -> np.ndarray:
    """Centers of the triangular filters, equally spaced on the mel axis."""
    pts = np.linspace(mel_scale(f_min_hz), mel_scale(f_max_hz), n_mels + 2)
    return mel_to_hz(pts[1:-1])


def mel_filterbank(
    n_mels: int, n_fft: int, rate_hz: int, f_min_hz: float = 0.0,
    f_max_hz: float | None = None,
) -> np.ndarray:
    """Triangular mel filterbank over the one-sided FFT bins.

    Returns an (n_mels, n_fft/2 + 1) nonnegative matrix whose rows have
    support inside [f_min, f_max].
    """
    nyquist = rate_hz / 2.0
    if f_max_hz is None:
        f_max_hz = nyquist
    if not f_min_hz < f_max_hz <= nyquist:
        raise ValueError(
            f"need f_min < f_max <= Nyquist, got [{f_min_hz}, {f_max_hz}] at rate {rate_hz}"
        )
    n_bins = n_fft // 2 + 1
    if n_mels < 2:
        raise ValueError("n_mels must be at least 2")
    if n_mels > n_bins:
        raise ValueError(f"{n_mels} mel bands exceed the {n_bins} available bins")
    edges = mel_to_hz(
        np.linspace(mel_scale(f_min_hz), mel_scale(f_max_hz), n_mels + 2)
    )
    bin_hz = np.arange(n_bins) * (rate_hz / n_fft)
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, center, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        fb[m] = np.maximum(0.0, np.minimum(rising, falling))
    return fb


def mel_spectrogram(
    clip: AudioClip,
    stft_cfg: StftConfig = StftConfig(),
    mel_cfg: MelConfig = MelConfig(),
    log_scaled: bool = True,
) -> MelSpectrogram:
    """Filterbank energies of the power spectrogram, optionally in dB."""
    spec = stft(clip, stft_cfg)
    fb = mel_filterbank(
        mel_cfg.n_mels, stft_cfg.n_fft, clip.sample_rate_hz,
        mel_cfg.f_min_hz, mel_cfg.f_max_hz,
    )
    energies = fb @ (spec.magnitude() ** 2)
    if log_scaled:
        energies = 10.0 * np.log10(energies + LOG_EPS)
    return MelSpectrogram(energies=energies, log_scaled=log_scaled, mel_config=mel_cfg)


def dct2_ortho(matrix: np.ndarray, n_coeffs: int | None = None) -> np.ndarray:
    """Orthonormal DCT-II down the columns, keeping the first n_coeffs rows."""
    out = dct(np.asarray(matrix, dtype=np.float64), type=2, axis=0, norm="ortho")
    return out if n_coeffs is None else out[:n_coeffs]


def mfcc(
    clip: AudioClip,
    stft_cfg: StftConfig = StftConfig(),
    mel_cfg: MelConfig = MelConfig(),
    n_coeffs: int = 20,
) -> np.ndarray:
    """First n_coeffs rows of the orthonormal DCT-II of the log-mel bands."""
    if n_coeffs > mel_cfg.n_mels:
        raise ValueError(f"{n_coeffs} coefficients from {mel_cfg.n_mels} mel bands")
    logmel = mel_spectrogram(clip, stft_cfg, mel_cfg, log_scaled=True)
    return dct2_ortho(logmel.energies, n_coeffs)


@dataclass(frozen=True)
class FeatureConfig:
    """Recipe turning an arbitrary clip into the fixed-length model input."""

    sample_rate_hz: int = CANONICAL_RATE_HZ
    stft: StftConfig = StftConfig()
    length: int = 259
    f_min_hz: float = 0.0
    f_max_hz: float | None = None
    variant: str = "logmel"  # "logmel" | "mfcc"

    def __post_init__(self):
        if self.variant not in ("logmel", "mfcc"):
            raise ValueError(f"unknown feature variant {self.variant!r}")

    def mel_config(self) -> MelConfig:
        return MelConfig(
            n_mels=self.length, f_min_hz=self.f_min_hz, f_max_hz=self.f_max_hz
        )

    def min_samples(self, rate_hz: int) -> int:
        """Samples needed at rate_hz so one STFT frame survives resampling."""
        if rate_hz == self.sample_rate_hz:
            return self.stft.n_fft
        return int(np.ceil(self.stft.n_fft * rate_hz / self.sample_rate_hz)) + 1


DEFAULT_FEATURES = FeatureConfig()


def feature_vector(clip: AudioClip, cfg: FeatureConfig = DEFAULT_FEATURES) -> FeatureVector:
    """Fixed-length feature: time mean of the log-mel bands (or of MFCCs).

    The clip is first resampled to the canonical analysis rate, so two
    byte-identical clips produce byte-identical features regardless of
    where they came from.
    """
    clip = resample(clip, cfg.sample_rate_hz)
    if len(clip) < cfg.stft.n_fft:
        raise TooShortError(
            f"{len(clip)} samples at {cfg.sample_rate_hz} Hz is under one frame"
        )
    if cfg.variant == "mfcc":
        mat = mfcc(clip, cfg.stft, cfg.mel_config(), n_coeffs=cfg.length)
    else:
        mat = mel_spectrogram(clip, cfg.stft, cfg.mel_config(), log_scaled=True).energies
    return FeatureVector(values=mat.mean(axis=1), length=cfg.length)


def spectrogram_db(spec: Spectrogram, floor_db: float = LOG_FLOOR_DB) -> np.ndarray:
    """Magnitude matrix in dB, floored; ready for PGM/PNG rendering."""
    return np.maximum(20.0 * np.log10(spec.magnitude() + np.sqrt(LOG_EPS)), floor_db)


def save_matrix_csv(matrix: np.ndarray, path) -> None:
    """Row-major CSV dump at 9 significant digits (re-parseable exactly enough)."""
    np.savetxt(path, np.atleast_2d(matrix), delimiter=",", fmt="%.9g")


def load_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=","))


def save_pgm(matrix: np.ndarray, path, vmin: float = LOG_FLOOR_DB, vmax: float = 0.0) -> None:
    """8-bit PGM image of a matrix, row 0 at the top, values clipped to [vmin, vmax]."""
    scaled = (np.clip(matrix, vmin, vmax) - vmin) / (vmax - vmin)
    img = np.flipud(np.rint(scaled * 255).astype(np.uint8))
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
