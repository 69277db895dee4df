#!/usr/bin/env python3
"""Full-corpus experiment: ingest a real RAVDESS download, train, evaluate.

    EMOVOX_RAVDESS_DIR=/path/to/Audio_Song_Actors_01-24 \
        python3 demos/06_full_dataset_run.py [epochs]

This is the long-running counterpart of the banded acceptance check: it
reports the observed song-subset size (published: 1,012 clips), trains the
full model with best-checkpoint saving, and writes the accuracy/loss curves
and confusion matrix. Expect hours on CPU at 2,000 epochs; pass a smaller
epoch count to smoke-test the path.
"""

import os
import sys

import numpy as np

from emovox import dataset, nn

root = os.environ.get("EMOVOX_RAVDESS_DIR")
if not root:
    sys.exit("set EMOVOX_RAVDESS_DIR to a local RAVDESS song-subset download")
epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 2000

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

ds = dataset.build_dataset(root)
print(f"ingested {len(ds)} song clips (published subset size: 1,012)")
for label, count in ds.class_counts().items():
    print(f"  {label.label_name}: {count}")

train_ds, test_ds = dataset.split_train_test(ds, 0.25, seed=0)
print(f"{len(train_ds)} train / {len(test_ds)} test")

model = nn.build_model(input_length=ds.feature_length, seed=0)
checkpoint = os.path.join(OUT, "ravdess_model.evx")
report = nn.train(model, train_ds, test_ds, epochs=epochs,
                  checkpoint_path=checkpoint, seed=0)
report.to_csv(os.path.join(OUT, "ravdess_curves.csv"))

best = nn.load_model(checkpoint)
x_test, y_test = test_ds.to_arrays()
preds = nn.forward(best, x_test, mode="eval").argmax(axis=1)
conf = nn.confusion_matrix([int(p) for p in preds], [int(y) for y in y_test])
np.savetxt(os.path.join(OUT, "ravdess_confusion.csv"), conf, fmt="%d", delimiter=",")

print(f"\nbest test accuracy {report.best_test_accuracy:.3f} at epoch {report.best_epoch}")
print(f"acceptance band for the reconstruction: [0.60, 0.85]")
print(f"artifacts in {OUT}: ravdess_model.evx, ravdess_curves.csv, ravdess_confusion.csv")
