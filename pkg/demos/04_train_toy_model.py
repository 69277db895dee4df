#!/usr/bin/env python3
"""Train the classifier end to end on a miniature six-emotion dataset.

    python3 demos/04_train_toy_model.py

Synthesizes two short "performances" per emotion (distinct tone mixtures),
extracts real features, trains the full 412,358-parameter model for a short
run, and plots the accuracy/loss curves plus the confusion matrix.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from emovox import audio, dataset, dsp, nn
from emovox.labels import LABEL_NAMES, EmotionLabel

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

rate = 22050
rng = np.random.default_rng(0)

# Each emotion gets a characteristic register and brightness; four takes each.
items = []
for label in EmotionLabel:
    f0 = 180 + 90 * label.class_index
    for take in range(4):
        t = np.arange(int(0.5 * rate)) / rate
        tone = 0.4 * np.sin(2 * np.pi * (f0 + 7 * take) * t)
        tone += 0.15 * np.sin(2 * np.pi * 2.7 * f0 * t)  # brightness partial
        tone += rng.normal(0, 0.02, len(t))
        clip = audio.AudioClip(np.clip(tone, -1, 1), rate)
        items.append((dsp.feature_vector(clip), label, None))

ds = dataset.Dataset(items=items, feature_length=259)
train_ds, test_ds = dataset.split_train_test(ds, 0.25, seed=0)
print(f"{len(train_ds)} training / {len(test_ds)} test clips")

model = nn.build_model(seed=0)
print(f"model has {model.param_count():,} trainable parameters")

checkpoint = os.path.join(OUT, "toy_model.evx")
report = nn.train(model, train_ds, test_ds, epochs=120,
                  checkpoint_path=checkpoint, seed=0)
report.to_csv(os.path.join(OUT, "toy_curves.csv"))
print(f"best test accuracy {report.best_test_accuracy:.3f} "
      f"at epoch {report.best_epoch}; checkpoint in {checkpoint}")

epochs = [s.epoch for s in report.epochs]
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(epochs, [s.train_accuracy for s in report.epochs], label="train")
ax1.plot(epochs, [s.test_accuracy for s in report.epochs], label="test")
ax1.set_xlabel("epoch"), ax1.set_ylabel("accuracy"), ax1.legend(), ax1.set_title("accuracy")
ax2.plot(epochs, [s.train_loss for s in report.epochs], label="train")
ax2.plot(epochs, [s.test_loss for s in report.epochs], label="test")
ax2.set_xlabel("epoch"), ax2.set_ylabel("cross-entropy"), ax2.legend(), ax2.set_title("loss")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "toy_curves.png"), dpi=120)

# Confusion matrix of the best checkpoint on the test split.
best = nn.load_model(checkpoint)
x_test, y_test = test_ds.to_arrays()
preds = nn.forward(best, x_test, mode="eval").argmax(axis=1)
conf = nn.confusion_matrix([int(p) for p in preds], [int(y) for y in y_test])
print("\nconfusion matrix (rows = truth, columns = prediction):")
print("            " + " ".join(f"{n[:4]:>5}" for n in LABEL_NAMES))
for i, name in enumerate(LABEL_NAMES):
    print(f"{name:>10}: " + " ".join(f"{v:5d}" for v in conf[i]))

plt.figure(figsize=(5, 4.5))
plt.imshow(conf, cmap="Blues")
plt.xticks(range(6), LABEL_NAMES, rotation=45)
plt.yticks(range(6), LABEL_NAMES)
plt.colorbar()
plt.title("toy confusion matrix")
plt.tight_layout()
plt.savefig(os.path.join(OUT, "toy_confusion.png"), dpi=120)
print(f"\nplots in {OUT}/toy_curves.png and toy_confusion.png")
