"""WAV decode/encode, mono mixdown, resampling, splitting, and audio capture.

The reader handles RIFF/WAVE containers with PCM 16-bit, PCM 24-bit, or
IEEE float-32 samples in one or two channels; everything downstream works
on mono clips normalized to [-1, 1]. Capture is abstracted behind
:class:`CaptureSource` so the whole analysis stack can be driven from a
file replay with bit-deterministic results.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import resample_poly

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE

MIN_RESAMPLE_RATE_HZ = 1000


class WavError(Exception):
    """Base class for WAV container/codec problems."""


class NotWavError(WavError):
    """The file is not a RIFF/WAVE container."""


class UnsupportedWavError(WavError):
    """The container is WAVE but the codec or bit depth is not supported."""


class CaptureError(Exception):
    """Audio capture failed (device missing, replay exhausted, ...)."""


class ReplayExhaustedError(CaptureError):
    """A file-replay capture ran past the end of its source file."""


@dataclass(frozen=True)
class AudioClip:
    """Mono PCM samples plus their sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def __len__(self) -> int:
        return len(self.samples)


def _iter_riff_chunks(data: bytes):
    """Yield (chunk_id, payload) pairs from the body of a RIFF file."""
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        payload = data[pos + 8:pos + 8 + size]
        yield chunk_id, payload
        pos += 8 + size + (size & 1)  # chunks are word-aligned


def read_wav(path) -> AudioClip:
    """Decode a WAV file into a normalized mono clip.

    Stereo input is averaged to mono; integer PCM is normalized by the
    type's max magnitude (so int16 -32768 maps to exactly -1.0).

    Raises:
        FileNotFoundError: missing file.
        NotWavError: not a RIFF/WAVE container.
        UnsupportedWavError: codec or bit depth outside PCM16/PCM24/float32.
    """
    with open(path, "rb") as fh:
        data = fh.read()

    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise NotWavError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    for chunk_id, chunk in _iter_riff_chunks(data):
        if chunk_id == b"fmt " and fmt is None:
            if len(chunk) < 16:
                raise NotWavError(f"{path}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", chunk, 0)
        elif chunk_id == b"data" and payload is None:
            payload = chunk
    if fmt is None or payload is None:
        raise NotWavError(f"{path}: missing fmt or data chunk")

    format_tag, n_channels, rate, _byte_rate, _block_align, bits = fmt
    if format_tag == WAVE_FORMAT_EXTENSIBLE:
        # The real format lives in the first two bytes of the SubFormat GUID.
        raise UnsupportedWavError(f"{path}: WAVE_FORMAT_EXTENSIBLE not supported")
    if n_channels not in (1, 2):
        raise UnsupportedWavError(f"{path}: {n_channels} channels (want 1 or 2)")

    if format_tag == WAVE_FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload, dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif format_tag == WAVE_FORMAT_PCM and bits == 24:
        raw = np.frombuffer(payload, dtype=np.uint8)
        raw = raw[: (len(raw) // 3) * 3].reshape(-1, 3)
        # Sign-extend little-endian 24-bit into int32.
        as_int = (
            raw[:, 0].astype(np.int32)
            | (raw[:, 1].astype(np.int32) << 8)
            | (raw[:, 2].astype(np.int32) << 16)
        )
        as_int = np.where(as_int >= 1 << 23, as_int - (1 << 24), as_int)
        samples = as_int.astype(np.float64) / float(1 << 23)
    elif format_tag == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedWavError(
            f"{path}: format tag {format_tag} / {bits}-bit not supported"
        )

    if n_channels == 2:
        samples = samples[: (len(samples) // 2) * 2].reshape(-1, 2).mean(axis=1)
    samples = np.clip(samples, -1.0, 1.0)
    if not np.all(np.isfinite(samples)):
        raise UnsupportedWavError(f"{path}: non-finite samples after decode")
    return AudioClip(samples=samples, sample_rate_hz=int(rate))


def write_wav(clip: AudioClip, path) -> None:
    """Encode a clip as PCM 16-bit mono, little-endian.

    Round trip through :func:`read_wav` recovers every sample within one
    quantization step (1/32768). Raises ValueError on an empty clip.
    """
    if len(clip) == 0:
        raise ValueError("refusing to write an empty clip")
    quantized = np.clip(
        np.rint(np.clip(clip.samples, -1.0, 1.0) * 32768.0), -32768, 32767
    ).astype("<i2")
    payload = quantized.tobytes()
    rate = clip.sample_rate_hz
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(payload)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, WAVE_FORMAT_PCM, 1, rate, rate * 2, 2, 16),
            b"data",
            struct.pack("<I", len(payload)),
        ]
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def resample(clip: AudioClip, target_hz: int) -> AudioClip:
    """Polyphase resample to target_hz; identity when rates already match."""
    if target_hz < MIN_RESAMPLE_RATE_HZ:
        raise ValueError(f"target rate {target_hz} Hz below {MIN_RESAMPLE_RATE_HZ} Hz")
    if target_hz == clip.sample_rate_hz:
        return clip
    g = math.gcd(clip.sample_rate_hz, int(target_hz))
    up, down = int(target_hz) // g, clip.sample_rate_hz // g
    out = resample_poly(clip.samples, up, down)
    return AudioClip(samples=out, sample_rate_hz=int(target_hz))


def get_duration(clip: AudioClip) -> float:
    """Duration in seconds, exactly count(samples)/rate."""
    return clip.duration_seconds


def single_split(clip: AudioClip, from_s: float, to_s: float) -> AudioClip:
    """Slice [from_s, to_s) out of a clip; the end is clamped to the clip."""
    if from_s < 0 or to_s <= from_s:
        raise ValueError(f"bad split bounds [{from_s}, {to_s})")
    if from_s >= clip.duration_seconds:
        raise ValueError(
            f"split start {from_s}s past clip end {clip.duration_seconds}s"
        )
    start = int(math.floor(from_s * clip.sample_rate_hz))
    stop = min(int(math.floor(to_s * clip.sample_rate_hz)), len(clip))
    return AudioClip(samples=clip.samples[start:stop], sample_rate_hz=clip.sample_rate_hz)


def multiple_split(clip: AudioClip, segment_s: float) -> list[AudioClip]:
    """Tile a clip into segment_s-long pieces, keeping the short remainder.

    Segments concatenate back to the input sample-for-sample.
    """
    if segment_s <= 0:
        raise ValueError(f"segment length must be positive, got {segment_s}")
    step = int(round(segment_s * clip.sample_rate_hz))
    if step <= 0:
        raise ValueError(f"segment length {segment_s}s is under one sample")
    out = []
    for start in range(0, len(clip), step):
        out.append(
            AudioClip(
                samples=clip.samples[start:start + step],
                sample_rate_hz=clip.sample_rate_hz,
            )
        )
    return out


@dataclass(frozen=True)
class CaptureSource:
    """Where live audio comes from: a device or a deterministic file replay."""

    kind: str  # "device" | "file_replay"
    identifier: str
    block_seconds: float = 0.5

    def __post_init__(self):
        if self.kind not in ("device", "file_replay"):
            raise ValueError(f"unknown capture kind {self.kind!r}")
        if self.block_seconds <= 0:
            raise ValueError("block_seconds must be positive")


class FileReplayStream:
    """Replays a WAV file block by block; identical replays yield identical bits."""

    def __init__(self, source: CaptureSource):
        self._clip = read_wav(source.identifier)
        self._pos = 0

    @property
    def sample_rate_hz(self) -> int:
        return self._clip.sample_rate_hz

    def read(self, seconds: float, allow_partial: bool = False) -> AudioClip | None:
        """Next `seconds` of audio; None once the replay is exhausted.

        With allow_partial the final short block is returned; without it a
        partial block raises ReplayExhaustedError.
        """
        want = int(round(seconds * self.sample_rate_hz))
        if want <= 0:
            raise ValueError("capture length must be positive")
        remaining = len(self._clip) - self._pos
        if remaining <= 0:
            if allow_partial:
                return None
            raise ReplayExhaustedError("replay file exhausted")
        if remaining < want and not allow_partial:
            raise ReplayExhaustedError(
                f"replay has {remaining} samples left, {want} requested"
            )
        take = min(want, remaining)
        block = self._clip.samples[self._pos:self._pos + take]
        self._pos += take
        return AudioClip(samples=block, sample_rate_hz=self.sample_rate_hz)

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class DeviceStream:
    """Microphone capture via sounddevice, when that stack is present."""

    def __init__(self, source: CaptureSource, sample_rate_hz: int = 22050):
        try:
            import sounddevice  # noqa: F401  deferred: not present on CI boxes
        except ImportError as exc:
            raise CaptureError(
                "device capture needs the sounddevice package and audio hardware"
            ) from exc
        self._sd = sounddevice
        self._device = source.identifier or None
        self._rate = sample_rate_hz

    @property
    def sample_rate_hz(self) -> int:
        return self._rate

    def read(self, seconds: float, allow_partial: bool = False) -> AudioClip:
        want = int(round(seconds * self._rate))
        try:
            buf = self._sd.rec(
                want, samplerate=self._rate, channels=1, dtype="float32",
                device=self._device, blocking=True,
            )
        except Exception as exc:
            raise CaptureError(f"device capture failed: {exc}") from exc
        return AudioClip(
            samples=np.clip(buf[:, 0].astype(np.float64), -1.0, 1.0),
            sample_rate_hz=self._rate,
        )

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def open_capture(source: CaptureSource):
    """Open a capture stream for a source. Streams are single-consumer."""
    if source.kind == "file_replay":
        return FileReplayStream(source)
    return DeviceStream(source)


def capture(source: CaptureSource, seconds: float) -> AudioClip:
    """One-shot capture of exactly `seconds` of audio from a fresh stream."""
    if seconds <= 0:
        raise ValueError("capture length must be positive")
    with open_capture(source) as stream:
        return stream.read(seconds, allow_partial=False)
