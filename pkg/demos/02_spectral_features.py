#!/usr/bin/env python3
"""From waveform to model input: STFT, mel spectrogram, cepstrum, features.

    python3 demos/02_spectral_features.py

Writes a mel-spectrogram image (PGM + PNG) and prints the feature pipeline
stages for a synthetic "sung phrase".
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from emovox import audio, dsp

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rate = 22050
t = np.arange(int(3.0 * rate)) / rate

# A vibrato "voice" gliding between notes, plus a soft chord bed.
glide = 330 * 2 ** (np.minimum(t, 2.0) / 2.0 * 7 / 12)   # rise a fifth over 2 s
vibrato = glide * (1 + 0.01 * np.sin(2 * np.pi * 5.5 * t))
voice = 0.45 * np.sin(2 * np.pi * np.cumsum(vibrato) / rate)
chord = sum(0.12 * np.sin(2 * np.pi * f * t) for f in (110, 165, 220))
clip = audio.AudioClip(np.clip(voice + chord, -1, 1), rate)

# The mel scale compresses high frequencies the way hearing does.
for f in (110, 440, 1000, 4000):
    print(f"mel({f} Hz) = {dsp.mel_scale(f):7.1f}")

spec = dsp.stft(clip, dsp.StftConfig())
print(f"\nSTFT: {spec.bins.shape[0]} bins x {spec.n_frames} frames")

mel = dsp.mel_spectrogram(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=128))
dsp.save_pgm(mel.energies, os.path.join(OUT, "phrase_melspec.pgm"))
print(f"log-mel spectrogram: {mel.energies.shape}, "
      f"range [{mel.energies.min():.0f}, {mel.energies.max():.0f}] dB")

plt.figure(figsize=(9, 4))
plt.imshow(mel.energies, aspect="auto", origin="lower", cmap="magma",
           extent=[0, clip.duration_seconds, 0, 128], vmin=-100, vmax=0)
plt.colorbar(label="dB")
plt.xlabel("time (s)")
plt.ylabel("mel band")
plt.title("Log-mel spectrogram of the synthetic phrase")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "phrase_melspec.png"), dpi=120)
print(f"wrote {OUT}/phrase_melspec.pgm and .png")

# The cepstrum turns periodicity into a quefrency peak: feed it one frame
# of a pulse train (vocal-fold-like excitation) and read off the period.
frame = np.zeros(2048)
frame[::147] = 1.0  # 147 samples -> 150 Hz at 22.05 kHz
ceps = dsp.power_cepstrum(frame * dsp.hann_window(2048), 2048)
peak = int(np.argmax(ceps[32:1024])) + 32
print(f"\ncepstral peak at quefrency {peak} samples "
      f"(~{rate / peak:.0f} Hz fundamental; truth 150 Hz)")

# MFCCs: DCT-compressed summary of the log-mel envelope.
coeffs = dsp.mfcc(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=40), n_coeffs=13)
print(f"MFCC matrix: {coeffs.shape} (13 coefficients per frame)")

# And the model input: one fixed-length vector per clip.
fv = dsp.feature_vector(clip)
print(f"feature vector: length {fv.length}, "
      f"argmax band {int(np.argmax(fv.values))}, min {fv.values.min():.1f} dB")
