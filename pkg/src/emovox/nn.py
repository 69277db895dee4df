"""A 1-D CNN built from scratch: layers, backprop, Adam, checkpointing.

The default architecture is the six-class sung-emotion classifier:

    Conv1D(64, k=10) -> Conv1D(128, k=10) -> MaxPool(6) -> Dropout(0.2)
    -> Conv1D(128, k=10) -> MaxPool(6) -> Dropout(0.2)
    -> Flatten -> Dense(256) -> Dropout(0.2) -> Dense(6, softmax)

with valid (no-padding) convolutions, pool stride equal to pool size, and
412,358 trainable parameters at input length 259. All math is plain numpy;
gradients are exact analytic derivatives of the mean cross-entropy given
the sampled dropout masks.
"""

from __future__ import annotations

import json
import logging
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .labels import EmotionLabel, N_CLASSES

log = logging.getLogger(__name__)

CE_EPS = 1e-12
MODEL_MAGIC = b"EVXM"
MODEL_VERSION = 1


class ArchitectureError(ValueError):
    """Layer chain breaks (e.g. a pooled length reaches zero)."""


class NoForwardPassError(RuntimeError):
    """backward() called with a tape that no train-mode forward filled."""


class TrainingDivergedError(RuntimeError):
    """Loss went non-finite; training aborted, checkpoint untouched."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ModelFormatError(ValueError):
    """Weights file is not in the expected container format."""


class ModelVersionError(ModelFormatError):
    """Weights file was written by an incompatible format version."""


class ChecksumError(ModelFormatError):
    """Weights file is corrupted (checksum mismatch)."""


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv1d | maxpool1d | dropout | flatten | dense
    filters: int | None = None
    kernel: int | None = None
    pool: int | None = None
    rate: float | None = None
    units: int | None = None
    activation: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "LayerSpec":
        return cls(**d)


def default_architecture(dropout: float = 0.2) -> list[LayerSpec]:
    return [
        LayerSpec(kind="conv1d", filters=64, kernel=10, activation="relu"),
        LayerSpec(kind="conv1d", filters=128, kernel=10, activation="relu"),
        LayerSpec(kind="maxpool1d", pool=6),
        LayerSpec(kind="dropout", rate=dropout),
        LayerSpec(kind="conv1d", filters=128, kernel=10, activation="relu"),
        LayerSpec(kind="maxpool1d", pool=6),
        LayerSpec(kind="dropout", rate=dropout),
        LayerSpec(kind="flatten"),
        LayerSpec(kind="dense", units=256, activation="relu"),
        LayerSpec(kind="dropout", rate=dropout),
        LayerSpec(kind="dense", units=6, activation="softmax"),
    ]


@dataclass
class Model:
    layers: list  # LayerSpec, in order
    params: list  # per layer: {"W": ..., "b": ...} or None
    input_length: int
    n_classes: int
    dtype: np.dtype

    def param_count(self) -> int:
        return sum(
            int(p["W"].size + p["b"].size) for p in self.params if p is not None
        )

    def per_layer_param_counts(self) -> list[int]:
        return [
            int(p["W"].size + p["b"].size) if p is not None else 0
            for p in self.params
        ]

    def shape_chain(self) -> list:
        """Output shape after each layer: (length, channels) or flat width."""
        shapes = []
        shape = (self.input_length, 1)
        for spec in self.layers:
            shape = _output_shape(spec, shape)
            shapes.append(shape)
        return shapes


def _output_shape(spec: LayerSpec, shape):
    if spec.kind == "conv1d":
        length, _channels = shape
        out_len = length - spec.kernel + 1
        if out_len <= 0:
            raise ArchitectureError(
                f"conv kernel {spec.kernel} does not fit length {length}"
            )
        return (out_len, spec.filters)
    if spec.kind == "maxpool1d":
        length, channels = shape
        out_len = length // spec.pool
        if out_len <= 0:
            raise ArchitectureError(f"pool {spec.pool} empties length {length}")
        return (out_len, channels)
    if spec.kind == "dropout":
        return shape
    if spec.kind == "flatten":
        length, channels = shape
        return length * channels
    if spec.kind == "dense":
        if isinstance(shape, tuple):
            raise ArchitectureError("dense layer needs a flattened input")
        return spec.units
    raise ArchitectureError(f"unknown layer kind {spec.kind!r}")


def build_model(
    input_length: int = 259,
    n_classes: int = N_CLASSES,
    arch: list | None = None,
    seed: int = 0,
    dtype=np.float32,
) -> Model:
    """Instantiate a model with fan-in-scaled uniform weights, zero biases."""
    arch = list(arch) if arch is not None else default_architecture()
    if arch[-1].kind != "dense" or arch[-1].activation != "softmax":
        raise ArchitectureError("final layer must be a softmax dense")
    if arch[-1].units != n_classes:
        raise ArchitectureError(
            f"final dense has {arch[-1].units} units, expected {n_classes}"
        )
    rng = np.random.default_rng(seed)
    dtype = np.dtype(dtype)
    params = []
    shape = (input_length, 1)
    for spec in arch:
        if spec.kind == "conv1d":
            _length, channels = shape
            fan_in = spec.kernel * channels
            limit = np.sqrt(6.0 / fan_in)
            w = rng.uniform(-limit, limit, size=(spec.kernel, channels, spec.filters))
            params.append(
                {"W": w.astype(dtype), "b": np.zeros(spec.filters, dtype=dtype)}
            )
        elif spec.kind == "dense":
            fan_in = shape if not isinstance(shape, tuple) else None
            if fan_in is None:
                raise ArchitectureError("dense layer needs a flattened input")
            limit = np.sqrt(6.0 / fan_in)
            w = rng.uniform(-limit, limit, size=(fan_in, spec.units))
            params.append(
                {"W": w.astype(dtype), "b": np.zeros(spec.units, dtype=dtype)}
            )
        else:
            params.append(None)
        shape = _output_shape(spec, shape)
    return Model(
        layers=arch, params=params, input_length=input_length,
        n_classes=n_classes, dtype=dtype,
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _conv1d_forward(x, w, b):
    # x: (B, L, C), w: (K, C, F) -> (B, L-K+1, F)
    k = w.shape[0]
    windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=1)
    # windows: (B, T, C, K); contract over (C, K)
    return np.tensordot(windows, w, axes=([3, 2], [0, 1])) + b


def _conv1d_backward(x, w, dz):
    k = w.shape[0]
    windows = np.lib.stride_tricks.sliding_window_view(x, k, axis=1)
    dw = np.tensordot(windows, dz, axes=([0, 1], [0, 1]))  # (C, K, F)
    dw = dw.transpose(1, 0, 2)
    db = dz.sum(axis=(0, 1))
    dx = np.zeros_like(x)
    t_out = dz.shape[1]
    for kk in range(k):
        dx[:, kk:kk + t_out, :] += dz @ w[kk].T
    return dx, dw, db


def forward(model: Model, batch, mode: str = "eval", rng=None, tape: dict | None = None):
    """Class probabilities for a (batch, input_length) feature matrix.

    Dropout fires only in train mode (inverted: eval applies no rescaling).
    Passing a dict as `tape` records the activations backward() needs.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be train or eval, got {mode!r}")
    batch = np.asarray(batch, dtype=model.dtype)
    if batch.ndim == 1:
        batch = batch[None, :]
    if batch.shape[1] != model.input_length:
        raise ValueError(
            f"feature length {batch.shape[1]} != model input {model.input_length}"
        )
    train = mode == "train"
    if train and rng is None:
        rng = np.random.default_rng()

    x = batch[:, :, None]
    records = []
    for spec, p in zip(model.layers, model.params):
        if spec.kind == "conv1d":
            z = _conv1d_forward(x, p["W"], p["b"])
            y = np.maximum(z, 0.0)
            records.append({"x": x, "z": z})
            x = y
        elif spec.kind == "maxpool1d":
            b_, length, channels = x.shape
            t_out = length // spec.pool
            trimmed = x[:, : t_out * spec.pool, :].reshape(b_, t_out, spec.pool, channels)
            arg = trimmed.argmax(axis=2)
            records.append({"in_shape": x.shape, "arg": arg})
            x = np.take_along_axis(trimmed, arg[:, :, None, :], axis=2)[:, :, 0, :]
        elif spec.kind == "dropout":
            if train and spec.rate > 0.0:
                keep = (rng.random(x.shape) >= spec.rate).astype(model.dtype)
                mask = keep / model.dtype.type(1.0 - spec.rate)
                records.append({"mask": mask})
                x = x * mask
            else:
                records.append({"mask": None})
        elif spec.kind == "flatten":
            records.append({"in_shape": x.shape})
            x = x.reshape(x.shape[0], -1)
        elif spec.kind == "dense":
            z = x @ p["W"] + p["b"]
            records.append({"x": x, "z": z})
            x = _softmax(z) if spec.activation == "softmax" else np.maximum(z, 0.0)
        else:
            raise ArchitectureError(f"unknown layer kind {spec.kind!r}")
    probs = x
    if tape is not None:
        tape.clear()
        tape.update({"mode": mode, "records": records, "probs": probs})
    return probs


def cross_entropy(probs, labels) -> float:
    """Mean over the batch of -log(probability assigned to the true class)."""
    probs = np.asarray(probs)
    labels = np.asarray(labels, dtype=np.int64)
    picked = probs[np.arange(len(labels)), labels]
    return float(np.mean(-np.log(picked + CE_EPS)))


def backward(model: Model, tape: dict, labels) -> list:
    """Gradients of the mean cross-entropy w.r.t. every weight tensor.

    Requires a tape recorded by a train-mode forward; returns one
    {"W": ..., "b": ...} dict (or None) per layer.
    """
    if not tape or tape.get("mode") != "train" or "records" not in tape:
        raise NoForwardPassError("backward needs a tape from a train-mode forward")
    records = tape["records"]
    probs = tape["probs"]
    labels = np.asarray(labels, dtype=np.int64)
    batch = probs.shape[0]
    onehot = np.zeros_like(probs)
    onehot[np.arange(batch), labels] = 1.0
    # dL/dz of the softmax+cross-entropy head, averaged over the batch.
    delta = (probs - onehot) / model.dtype.type(batch)

    grads: list = [None] * len(model.layers)
    at_head = True
    for i in range(len(model.layers) - 1, -1, -1):
        spec, p, rec = model.layers[i], model.params[i], records[i]
        if spec.kind == "dense":
            if at_head:
                dz = delta  # softmax folded into the loss derivative
                at_head = False
            else:
                dz = delta * (rec["z"] > 0)
            grads[i] = {"W": rec["x"].T @ dz, "b": dz.sum(axis=0)}
            delta = dz @ p["W"].T
        elif spec.kind == "flatten":
            delta = delta.reshape(rec["in_shape"])
        elif spec.kind == "dropout":
            if rec["mask"] is not None:
                delta = delta * rec["mask"]
        elif spec.kind == "maxpool1d":
            b_, length, channels = rec["in_shape"]
            t_out = rec["arg"].shape[1]
            scatter = np.zeros((b_, t_out, spec.pool, channels), dtype=delta.dtype)
            np.put_along_axis(scatter, rec["arg"][:, :, None, :], delta[:, :, None, :], axis=2)
            dx = np.zeros((b_, length, channels), dtype=delta.dtype)
            dx[:, : t_out * spec.pool, :] = scatter.reshape(b_, t_out * spec.pool, channels)
            delta = dx
        elif spec.kind == "conv1d":
            dz = delta * (rec["z"] > 0)
            dx, dw, db = _conv1d_backward(rec["x"], p["W"], dz)
            grads[i] = {"W": dw, "b": db}
            delta = dx
    return grads


@dataclass(frozen=True)
class OptimizerConfig:
    """Mini-batch gradient descent with adaptive per-parameter moments."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32


class _AdamState:
    def __init__(self, model: Model, cfg: OptimizerConfig):
        self.cfg = cfg
        self.t = 0
        self.m = [
            {k: np.zeros_like(v) for k, v in p.items()} if p is not None else None
            for p in model.params
        ]
        self.v = [
            {k: np.zeros_like(v) for k, v in p.items()} if p is not None else None
            for p in model.params
        ]

    def step(self, model: Model, grads: list) -> None:
        c = self.cfg
        self.t += 1
        lr_t = c.learning_rate * np.sqrt(1 - c.beta2 ** self.t) / (1 - c.beta1 ** self.t)
        for p, g, m, v in zip(model.params, grads, self.m, self.v):
            if p is None or g is None:
                continue
            for key in ("W", "b"):
                grad = g[key].astype(p[key].dtype)
                m[key] = c.beta1 * m[key] + (1 - c.beta1) * grad
                v[key] = c.beta2 * v[key] + (1 - c.beta2) * grad * grad
                p[key] -= lr_t * m[key] / (np.sqrt(v[key]) + c.eps)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    test_loss: float
    test_accuracy: float


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)  # EpochStats, in order
    best_epoch: int = 0
    best_test_accuracy: float = 0.0

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("epoch,train_loss,train_acc,test_loss,test_acc\n")
            for s in self.epochs:
                fh.write(
                    f"{s.epoch},{s.train_loss:.9g},{s.train_accuracy:.9g},"
                    f"{s.test_loss:.9g},{s.test_accuracy:.9g}\n"
                )

    @classmethod
    def from_csv(cls, path) -> "TrainReport":
        report = cls()
        with open(path) as fh:
            next(fh)
            for line in fh:
                e, tl, ta, vl, va = line.strip().split(",")
                report.epochs.append(
                    EpochStats(int(e), float(tl), float(ta), float(vl), float(va))
                )
        if report.epochs:
            best = max(report.epochs, key=lambda s: (s.test_accuracy, -s.epoch))
            report.best_epoch = best.epoch
            report.best_test_accuracy = best.test_accuracy
        return report


def _as_arrays(data, model: Model):
    if hasattr(data, "to_arrays"):
        x, y = data.to_arrays()
    else:
        x, y = data
    x = np.asarray(x, dtype=model.dtype)
    y = np.asarray(y, dtype=np.int64)
    if len(x) == 0:
        raise ValueError("dataset is empty")
    if x.shape[1] != model.input_length:
        raise ValueError(
            f"feature length {x.shape[1]} != model input {model.input_length}"
        )
    return x, y


def evaluate(model: Model, x, y, chunk: int = 64):
    """(mean loss, accuracy) over a dataset, eval mode, chunked for memory."""
    x = np.asarray(x, dtype=model.dtype)
    y = np.asarray(y, dtype=np.int64)
    losses = []
    hits = 0
    for start in range(0, len(x), chunk):
        probs = forward(model, x[start:start + chunk], mode="eval")
        sl = y[start:start + chunk]
        losses.append(cross_entropy(probs, sl) * len(sl))
        hits += int((probs.argmax(axis=1) == sl).sum())
    return sum(losses) / len(x), hits / len(x)


def train(
    model: Model,
    train_data,
    test_data,
    epochs: int,
    opt: OptimizerConfig = OptimizerConfig(),
    checkpoint_path=None,
    seed: int = 0,
) -> TrainReport:
    """Shuffled mini-batch training with best-checkpoint saving.

    The checkpoint is (re)written only when an epoch strictly improves the
    best test accuracy so far. A non-finite loss aborts the run with
    TrainingDivergedError - a collapsed model is never saved as a new best.
    """
    if epochs <= 0:
        raise ValueError(f"epochs must be positive, got {epochs}")
    x_train, y_train = _as_arrays(train_data, model)
    x_test, y_test = _as_arrays(test_data, model)
    rng = np.random.default_rng(seed)
    adam = _AdamState(model, opt)
    report = TrainReport()
    best_acc = -1.0

    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(x_train))
        epoch_loss = 0.0
        epoch_hits = 0
        for start in range(0, len(order), opt.batch_size):
            batch_idx = order[start:start + opt.batch_size]
            xb, yb = x_train[batch_idx], y_train[batch_idx]
            tape: dict = {}
            probs = forward(model, xb, mode="train", rng=rng, tape=tape)
            loss = cross_entropy(probs, yb)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite training loss at epoch {epoch}, "
                    f"batch starting {start}; aborting without checkpointing",
                    report=report,
                )
            grads = backward(model, tape, yb)
            adam.step(model, grads)
            epoch_loss += loss * len(yb)
            epoch_hits += int((probs.argmax(axis=1) == yb).sum())

        train_loss = epoch_loss / len(x_train)
        train_acc = epoch_hits / len(x_train)
        test_loss, test_acc = evaluate(model, x_test, y_test)
        if not (np.isfinite(test_loss) and np.isfinite(test_acc)):
            raise TrainingDivergedError(
                f"non-finite test loss at epoch {epoch}; "
                "aborting without checkpointing",
                report=report,
            )
        report.epochs.append(
            EpochStats(epoch, train_loss, train_acc, test_loss, test_acc)
        )
        if test_acc > best_acc:
            best_acc = test_acc
            report.best_epoch = epoch
            report.best_test_accuracy = test_acc
            if checkpoint_path is not None:
                save_model(model, checkpoint_path)
        if epoch == 1 or epoch % 50 == 0:
            log.info(
                "epoch %d: train loss %.4f acc %.3f | test loss %.4f acc %.3f",
                epoch, train_loss, train_acc, test_loss, test_acc,
            )
    return report


@dataclass(frozen=True)
class Prediction:
    label: EmotionLabel
    probabilities: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=np.float64)
        if probs.shape != (N_CLASSES,):
            raise ValueError(f"expected {N_CLASSES} probabilities, got {probs.shape}")
        object.__setattr__(self, "probabilities", probs)


def predict(model: Model, fv) -> Prediction:
    """Eval-mode prediction; ties break toward the lowest class index."""
    values = fv.values if hasattr(fv, "values") else np.asarray(fv)
    probs = forward(model, values[None, :], mode="eval")[0]
    return Prediction(
        label=EmotionLabel(int(probs.argmax())),
        probabilities=probs.astype(np.float64),
    )


def confusion_matrix(preds, truths) -> np.ndarray:
    """6x6 count matrix: entry (i, j) = true class i predicted as j."""
    p = np.array([x.class_index if isinstance(x, EmotionLabel) else int(x) for x in preds])
    t = np.array([x.class_index if isinstance(x, EmotionLabel) else int(x) for x in truths])
    if len(p) != len(t):
        raise ValueError(f"{len(p)} predictions vs {len(t)} truths")
    mat = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(mat, (t, p), 1)
    return mat


def save_model(model: Model, path) -> None:
    """Versioned binary: magic, version, JSON header, f32 blobs, CRC32."""
    header = json.dumps(
        {
            "input_length": model.input_length,
            "n_classes": model.n_classes,
            "dtype": model.dtype.name,
            "layers": [spec.to_dict() for spec in model.layers],
        }
    ).encode("utf-8")
    blobs = b"".join(
        np.ascontiguousarray(p[key], dtype="<f4").tobytes()
        for p in model.params if p is not None
        for key in ("W", "b")
    )
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", MODEL_VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(blobs)
        fh.write(struct.pack("<I", zlib.crc32(blobs) & 0xFFFFFFFF))


def load_model(path) -> Model:
    """Inverse of save_model; validates magic, version, and checksum."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model file")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != MODEL_VERSION:
        raise ModelVersionError(f"{path}: format version {version}, want {MODEL_VERSION}")
    (header_len,) = struct.unpack_from("<I", data, 8)
    header_end = 12 + header_len
    if len(data) < header_end + 4:
        raise ModelFormatError(f"{path}: truncated header")
    try:
        header = json.loads(data[12:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: unreadable header") from exc

    arch = [LayerSpec.from_dict(d) for d in header["layers"]]
    model = build_model(
        input_length=header["input_length"],
        n_classes=header["n_classes"],
        arch=arch,
        dtype=np.dtype(header["dtype"]),
    )
    blob = data[header_end:-4]
    (stored_crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(blob) & 0xFFFFFFFF != stored_crc:
        raise ChecksumError(f"{path}: weight checksum mismatch")
    expected = sum(
        p["W"].size + p["b"].size for p in model.params if p is not None
    ) * 4
    if len(blob) != expected:
        raise ModelFormatError(
            f"{path}: {len(blob)} weight bytes, expected {expected}"
        )
    offset = 0
    for p in model.params:
        if p is None:
            continue
        for key in ("W", "b"):
            size = p[key].size
            flat = np.frombuffer(blob, dtype="<f4", count=size, offset=offset)
            p[key] = flat.reshape(p[key].shape).astype(model.dtype)
            offset += size * 4
    return model
