#!/usr/bin/env python3
"""Tour of the WAV toolkit: decode, duration, splitting, deterministic replay.

Creates its own fixture audio, so it runs anywhere:

    python3 demos/01_wav_toolkit.py
"""

import os

import numpy as np

from emovox import audio

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# Build a 10-second test signal: four tones back to back.
rate = 22050
tones = [np.sin(2 * np.pi * f * np.arange(int(2.5 * rate)) / rate) * 0.5
         for f in (220, 330, 440, 550)]
clip = audio.AudioClip(np.concatenate(tones), rate)
path = os.path.join(OUT, "four_tones.wav")
audio.write_wav(clip, path)
print(f"wrote {path} ({audio.get_duration(clip):.1f} s)")

# Round trip: PCM16 quantization error is bounded by one step.
back = audio.read_wav(path)
print(f"round-trip max error: {np.abs(back.samples - clip.samples).max():.2e} "
      f"(bound 1/32768 = {1/32768:.2e})")

# Slice out the third tone by timestamps.
third = audio.single_split(back, 5.0, 7.5)
print(f"single_split(5.0, 7.5): {len(third)} samples = {third.duration_seconds:.2f} s")

# Tile the file into 3-second segments; the remainder is kept, and the
# segments concatenate back to the input exactly.
segments = audio.multiple_split(back, 3.0)
print(f"multiple_split(3.0): {[round(s.duration_seconds, 2) for s in segments]}")
glued = np.concatenate([s.samples for s in segments])
print(f"concatenation identical: {np.array_equal(glued, back.samples)}")

# Resample for the analysis pipeline.
resampled = audio.resample(back, 16000)
print(f"resampled to 16 kHz: {len(resampled)} samples, "
      f"duration drift {abs(resampled.duration_seconds - back.duration_seconds):.2e} s")

# Deterministic capture: a file replay stands in for the microphone, so
# everything downstream can be tested bit-for-bit.
source = audio.CaptureSource(kind="file_replay", identifier=path)
take1 = audio.capture(source, 2.0)
take2 = audio.capture(source, 2.0)
print(f"two replay captures identical: {np.array_equal(take1.samples, take2.samples)}")
