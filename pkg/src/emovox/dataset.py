"""RAVDESS ingestion: filename metadata, song-subset selection, splitting.

RAVDESS file names carry seven dash-separated two-digit fields:
modality - vocal channel - emotion - intensity - statement - repetition -
actor (e.g. ``03-02-06-01-02-01-12.wav`` is an audio-only song clip,
fearful, normal intensity, statement 2, take 1, actor 12). The sung subset
covers the six in-model emotions; disgust and surprise appear only in the
speech channel and parse as out-of-model.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass

import numpy as np

from . import audio, dsp
from .labels import EmotionLabel

log = logging.getLogger(__name__)

_NAME_RE = re.compile(r"^(\d{2})-(\d{2})-(\d{2})-(\d{2})-(\d{2})-(\d{2})-(\d{2})\.wav$")

VOCAL_CHANNEL_SPEECH = 1
VOCAL_CHANNEL_SONG = 2

# Dataset emotion codes; 7/8 are valid parses but outside the six-class model.
EMOTION_CODE_TO_LABEL = {
    1: EmotionLabel.NEUTRAL,
    2: EmotionLabel.CALM,
    3: EmotionLabel.HAPPY,
    4: EmotionLabel.SAD,
    5: EmotionLabel.ANGRY,
    6: EmotionLabel.FEARFUL,
}
OUT_OF_MODEL_CODES = {7, 8}  # disgust, surprised


class MalformedNameError(ValueError):
    """Filename does not follow the 7-field dataset convention."""


class UnknownEmotionCodeError(ValueError):
    """Emotion field outside the documented 1..8 code range."""


class EmptyDatasetError(RuntimeError):
    """No usable audio found under the dataset root."""


@dataclass(frozen=True)
class ClipMetadata:
    modality: int
    vocal_channel: int
    emotion_code: int
    intensity: int
    statement: int
    repetition: int
    actor_id: int

    @property
    def is_song(self) -> bool:
        return self.vocal_channel == VOCAL_CHANNEL_SONG

    @property
    def in_model(self) -> bool:
        return self.emotion_code in EMOTION_CODE_TO_LABEL

    @property
    def emotion_label(self) -> EmotionLabel | None:
        return EMOTION_CODE_TO_LABEL.get(self.emotion_code)


@dataclass
class Dataset:
    items: list  # (FeatureVector, EmotionLabel, ClipMetadata) triples
    feature_length: int

    def __len__(self) -> int:
        return len(self.items)

    def class_counts(self) -> dict:
        counts = {label: 0 for label in EmotionLabel}
        for _, label, _ in self.items:
            counts[label] += 1
        return counts

    def to_arrays(self):
        """(features matrix, label-index vector) for the training loop."""
        x = np.stack([fv.values for fv, _, _ in self.items])
        y = np.array([label.class_index for _, label, _ in self.items], dtype=np.int64)
        return x, y


def parse_ravdess_name(filename: str) -> ClipMetadata:
    """Parse the 7-field hyphenated basename into metadata."""
    base = os.path.basename(filename)
    match = _NAME_RE.match(base)
    if match is None:
        raise MalformedNameError(
            f"{base!r} does not match the NN-NN-NN-NN-NN-NN-NN.wav convention"
        )
    fields = [int(g) for g in match.groups()]
    modality, vocal_channel, emotion_code, intensity, statement, repetition, actor = fields
    if not 1 <= emotion_code <= 8:
        raise UnknownEmotionCodeError(f"emotion code {emotion_code:02d} in {base!r}")
    if not 1 <= actor <= 24:
        raise MalformedNameError(f"actor id {actor:02d} outside 1..24 in {base!r}")
    return ClipMetadata(
        modality=modality,
        vocal_channel=vocal_channel,
        emotion_code=emotion_code,
        intensity=intensity,
        statement=statement,
        repetition=repetition,
        actor_id=actor,
    )


def _config_hash(cfg: dsp.FeatureConfig) -> str:
    blob = json.dumps(
        {
            "rate": cfg.sample_rate_hz,
            "n_fft": cfg.stft.n_fft,
            "hop": cfg.stft.hop,
            "window": cfg.stft.window,
            "length": cfg.length,
            "f_min": cfg.f_min_hz,
            "f_max": cfg.f_max_hz,
            "variant": cfg.variant,
        },
        sort_keys=True,
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class FeatureCache:
    """Extracted features persisted beside the audio, keyed by config hash."""

    def __init__(self, root_dir: str, cfg: dsp.FeatureConfig):
        self.dir = os.path.join(root_dir, ".feature_cache", _config_hash(cfg))
        self.length = cfg.length

    def _path(self, rel_name: str) -> str:
        safe = rel_name.replace(os.sep, "__")
        return os.path.join(self.dir, safe + ".csv")

    def get(self, rel_name: str):
        path = self._path(rel_name)
        if not os.path.exists(path):
            return None
        values = dsp.load_matrix_csv(path).ravel()
        if len(values) != self.length:
            return None  # stale entry from another layout
        return dsp.FeatureVector(values=values, length=self.length)

    def put(self, rel_name: str, fv: dsp.FeatureVector) -> None:
        os.makedirs(self.dir, exist_ok=True)
        dsp.save_matrix_csv(fv.values, self._path(rel_name))

    def write_manifest(self, counts: dict, total: int) -> None:
        os.makedirs(self.dir, exist_ok=True)
        manifest = {
            "feature_length": self.length,
            "total_items": total,
            "class_counts": {label.label_name: n for label, n in counts.items()},
        }
        with open(os.path.join(self.dir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)


def build_dataset(
    root_dir: str,
    cfg: dsp.FeatureConfig = dsp.DEFAULT_FEATURES,
    include_speech: bool = False,
    use_cache: bool = True,
) -> Dataset:
    """Walk a dataset root, extract features for every in-model song clip.

    Files are processed in sorted order so the result is independent of
    directory enumeration. Unreadable files are skipped with a logged count;
    it is an error only when nothing at all survives.
    """
    wav_paths = []
    for dirpath, _dirnames, filenames in os.walk(root_dir):
        for name in filenames:
            if name.lower().endswith(".wav"):
                wav_paths.append(os.path.join(dirpath, name))
    wav_paths.sort()
    if not wav_paths:
        raise EmptyDatasetError(f"no .wav files under {root_dir}")

    cache = FeatureCache(root_dir, cfg) if use_cache else None
    items = []
    skipped_unreadable = 0
    skipped_channel = 0
    skipped_out_of_model = 0
    skipped_malformed = 0
    for path in wav_paths:
        rel = os.path.relpath(path, root_dir)
        try:
            meta = parse_ravdess_name(path)
        except (MalformedNameError, UnknownEmotionCodeError):
            skipped_malformed += 1
            continue
        if not include_speech and not meta.is_song:
            skipped_channel += 1
            continue
        if not meta.in_model:
            skipped_out_of_model += 1
            continue
        fv = cache.get(rel) if cache else None
        if fv is None:
            try:
                clip = audio.read_wav(path)
                fv = dsp.feature_vector(clip, cfg)
            except (audio.WavError, dsp.TooShortError, OSError) as exc:
                log.warning("skipping %s: %s", rel, exc)
                skipped_unreadable += 1
                continue
            if cache:
                cache.put(rel, fv)
        items.append((fv, meta.emotion_label, meta))

    if not items:
        raise EmptyDatasetError(
            f"no usable song clips under {root_dir} "
            f"({skipped_unreadable} unreadable, {skipped_channel} wrong channel, "
            f"{skipped_malformed} malformed names)"
        )
    ds = Dataset(items=items, feature_length=cfg.length)
    counts = ds.class_counts()
    log.info(
        "dataset: %d items (%s); skipped %d unreadable, %d speech-channel, "
        "%d out-of-model, %d malformed",
        len(ds),
        ", ".join(f"{label.label_name}={n}" for label, n in counts.items()),
        skipped_unreadable, skipped_channel, skipped_out_of_model, skipped_malformed,
    )
    if cache:
        cache.write_manifest(counts, len(ds))
    return ds


def split_train_test(ds: Dataset, test_fraction: float, seed: int):
    """Stratified, deterministic train/test split.

    Each class contributes its exact share to the test set up to +-1 item
    (largest-remainder rounding), and the overall test size is
    round(len(ds) * test_fraction).
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    if len(ds) == 0:
        raise EmptyDatasetError("cannot split an empty dataset")

    rng = np.random.default_rng(seed)
    by_class: dict = {label: [] for label in EmotionLabel}
    for i, (_, label, _) in enumerate(ds.items):
        by_class[label].append(i)

    total_test = int(round(len(ds) * test_fraction))
    exact = {lab: len(ix) * test_fraction for lab, ix in by_class.items() if ix}
    base = {lab: int(np.floor(v)) for lab, v in exact.items()}
    remainder = total_test - sum(base.values())
    order = sorted(exact, key=lambda lab: exact[lab] - base[lab], reverse=True)
    take = dict(base)
    for lab in order:
        if remainder <= 0:
            break
        if take[lab] < len(by_class[lab]):
            take[lab] += 1
            remainder -= 1

    test_idx = []
    for lab in sorted(by_class, key=lambda l: l.class_index):
        ix = np.array(by_class[lab], dtype=np.int64)
        if len(ix) == 0:
            continue
        perm = rng.permutation(len(ix))
        test_idx.extend(ix[perm[: take.get(lab, 0)]].tolist())
    test_set = set(test_idx)
    train_items = [item for i, item in enumerate(ds.items) if i not in test_set]
    test_items = [ds.items[i] for i in sorted(test_idx)]
    return (
        Dataset(items=train_items, feature_length=ds.feature_length),
        Dataset(items=test_items, feature_length=ds.feature_length),
    )
