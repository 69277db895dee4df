"""Shared fixtures: synthetic WAV files built with stdlib tools only, so the
encoders under test are never their own oracle."""

import struct
import wave

import numpy as np
import pytest


def write_pcm16_wav(path, samples, rate):
    """Reference PCM16 mono writer via the stdlib wave module."""
    quantized = np.clip(np.rint(np.asarray(samples) * 32768.0), -32768, 32767)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(quantized.astype("<i2").tobytes())


def write_raw_wav(path, payload, rate, n_channels, bits, format_tag):
    """Hand-assembled RIFF/WAVE container for exotic fixtures."""
    block = n_channels * bits // 8
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(payload)),
            b"WAVE",
            b"fmt ",
            struct.pack(
                "<IHHIIHH", 16, format_tag, n_channels, rate, rate * block, block, bits
            ),
            b"data",
            struct.pack("<I", len(payload)),
        ]
    )
    with open(path, "wb") as fh:
        fh.write(header + payload)


def sine(freq, seconds, rate, amplitude=1.0):
    t = np.arange(int(round(seconds * rate))) / rate
    return amplitude * np.sin(2 * np.pi * freq * t)


@pytest.fixture(scope="session")
def wav_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("wavs")


@pytest.fixture(scope="session")
def silence_wav(wav_dir):
    path = wav_dir / "silence_16k.wav"
    write_pcm16_wav(path, np.zeros(16000), 16000)
    return path


@pytest.fixture(scope="session")
def tone_wav(wav_dir):
    """10 s of 440 Hz at 22.05 kHz, moderate level."""
    path = wav_dir / "tone_440.wav"
    write_pcm16_wav(path, sine(440.0, 10.0, 22050, amplitude=0.5), 22050)
    return path
