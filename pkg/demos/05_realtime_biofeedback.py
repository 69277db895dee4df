#!/usr/bin/env python3
"""Live biofeedback loop driven by a deterministic file replay.

    python3 demos/05_realtime_biofeedback.py

Runs the realtime classifier over a replayed "performance", prints one event
per window, then starts the streaming service and reads the same session
back over HTTP - exactly what the dashboard consumes.
"""

import json
import os
import urllib.request

import numpy as np

from emovox import audio, nn
from emovox.audio import CaptureSource
from emovox.realtime import run_realtime
from emovox.service import PredictionService

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rate = 22050
rng = np.random.default_rng(1)

# A 12-second "performance" that changes character every 3 seconds.
sections = []
for i, f0 in enumerate((220, 392, 262, 523)):
    t = np.arange(3 * rate) / rate
    section = 0.4 * np.sin(2 * np.pi * f0 * (1 + 0.01 * np.sin(2 * np.pi * 5 * t)) * t)
    section += 0.1 * np.sin(2 * np.pi * 1.5 * f0 * t) + rng.normal(0, 0.01, len(t))
    sections.append(section)
wav_path = os.path.join(OUT, "performance.wav")
audio.write_wav(audio.AudioClip(np.clip(np.concatenate(sections), -1, 1), rate), wav_path)

model = nn.build_model(seed=0)  # untrained weights still demo the plumbing
model_path = os.path.join(OUT, "demo_model.evx")
nn.save_model(model, model_path)

print("=== realtime events (3 s windows) ===")
source = CaptureSource(kind="file_replay", identifier=wav_path)
for event in run_realtime(source, 3.0, model):
    top = max(zip(event.probabilities, range(6)))
    print(f"  t={event.timestamp_s:5.1f}s  seq={event.sequence}  "
          f"label={event.label:<8} p={top[0]:.3f}")

print("\n=== same session over the streaming service ===")
service = PredictionService(
    model, CaptureSource(kind="file_replay", identifier=wav_path), window_s=3.0, port=0
)
service.start()
service.wait_for_session_end(timeout=30)
with urllib.request.urlopen(f"http://127.0.0.1:{service.port}/history") as resp:
    history = json.load(resp)
for event in history:
    print(f"  {json.dumps({k: event[k] for k in ('seq', 't', 'label')})}")
service.stop()
print(f"\n{len(history)} events served; the dashboard consumes this exact stream")
