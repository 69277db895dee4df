"""Command-line surface: demo | train | predict | isolate | split | record
| realtime | serve.

Batch commands are thin orchestration over the library modules; the
realtime and serve commands wrap the same classification path the batch
predict command uses.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import audio, dataset, dsp, nn, pipeline, separation, service
from .realtime import run_realtime

log = logging.getLogger(__name__)

DATASET_ENV_VAR = "EMOVOX_DATASET_DIR"


def _dataset_dir(args) -> str:
    root = args.dataset or os.environ.get(DATASET_ENV_VAR)
    if not root:
        raise SystemExit(
            f"no dataset directory: pass --dataset or set {DATASET_ENV_VAR}"
        )
    return root


def _capture_source(args) -> audio.CaptureSource:
    if getattr(args, "replay", None):
        return audio.CaptureSource(kind="file_replay", identifier=args.replay)
    return audio.CaptureSource(kind="device", identifier=getattr(args, "device", "") or "")


def cmd_demo(args) -> int:
    clip = audio.read_wav(args.path)
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.join(args.out_dir, os.path.splitext(os.path.basename(args.path))[0])

    # Downsampled waveform: at most ~2000 (time, amplitude) points.
    step = max(1, len(clip) // 2000)
    times = np.arange(0, len(clip), step) / clip.sample_rate_hz
    wav_csv = stem + ".waveform.csv"
    with open(wav_csv, "w") as fh:
        fh.write("time_s,amplitude\n")
        for t, a in zip(times, clip.samples[::step]):
            fh.write(f"{t:.9g},{a:.9g}\n")

    mel = dsp.mel_spectrogram(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=128))
    dsp.save_matrix_csv(mel.energies, stem + ".melspec.csv")
    dsp.save_pgm(mel.energies, stem + ".melspec.pgm")
    print(f"wrote {wav_csv}, {stem}.melspec.csv, {stem}.melspec.pgm")
    return 0


def cmd_train(args) -> int:
    if args.epochs <= 0:
        raise SystemExit("epochs must be positive")
    ds = dataset.build_dataset(_dataset_dir(args))
    print(f"dataset: {len(ds)} clips, features of length {ds.feature_length}")
    for label, count in ds.class_counts().items():
        print(f"  {label.label_name}: {count}")
    train_ds, test_ds = dataset.split_train_test(ds, args.test_fraction, args.seed)
    model = nn.build_model(input_length=ds.feature_length, seed=args.seed)
    print(f"model: {model.param_count()} trainable parameters")
    report = nn.train(
        model, train_ds, test_ds, epochs=args.epochs,
        opt=nn.OptimizerConfig(batch_size=args.batch_size),
        checkpoint_path=args.out, seed=args.seed,
    )
    report.to_csv(args.report)
    print(
        f"best test accuracy {report.best_test_accuracy:.4f} "
        f"at epoch {report.best_epoch}; curves in {args.report}"
    )
    best = nn.load_model(args.out)
    x_test, y_test = test_ds.to_arrays()
    preds = [int(p) for p in nn.forward(best, x_test, mode="eval").argmax(axis=1)]
    conf = nn.confusion_matrix(preds, [int(y) for y in y_test])
    dsp.save_matrix_csv(conf, args.confusion)
    print(f"confusion matrix of best checkpoint in {args.confusion}")
    return 0


def cmd_predict(args) -> int:
    model = nn.load_model(args.model)
    names = sorted(
        n for n in os.listdir(args.folder) if n.lower().endswith(".wav")
    )
    if not names:
        raise SystemExit(f"no .wav files in {args.folder}")
    os.makedirs(args.out_dir, exist_ok=True)
    for name in names:
        path = os.path.join(args.folder, name)
        try:
            clip = audio.read_wav(path)
        except (audio.WavError, OSError) as exc:
            log.warning("skipping %s: %s", name, exc)
            continue
        if args.isolate:
            clip = separation.separate_vocals(clip).foreground
        report = pipeline.classify_segments(
            clip, model, args.segment_seconds, source=name, isolated=args.isolate,
        )
        out_csv = os.path.join(args.out_dir, os.path.splitext(name)[0] + ".segments.csv")
        pipeline.report_to_csv(report, out_csv)
        summary = ", ".join(
            f"{row.offset_s:g}s={lab}"
            for row, lab in zip(report.rows, pipeline.labels_of(report))
        )
        print(f"{name}: {summary}")
        print(f"  -> {out_csv}")
    return 0


def cmd_isolate(args) -> int:
    clip = audio.read_wav(args.path)
    result = separation.separate_vocals(clip)
    prefix = args.out_prefix or os.path.splitext(args.path)[0]
    audio.write_wav(result.foreground, prefix + ".foreground.wav")
    audio.write_wav(result.background, prefix + ".background.wav")
    print(f"wrote {prefix}.foreground.wav, {prefix}.background.wav")
    if args.mask_csv:
        dsp.save_matrix_csv(result.mask, args.mask_csv)
        print(f"background mask in {args.mask_csv}")
    return 0


def cmd_split(args) -> int:
    clip = audio.read_wav(args.path)
    segments = audio.multiple_split(clip, args.segment_seconds)
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.path))[0]
    for i, segment in enumerate(segments):
        out = os.path.join(args.out_dir, f"{stem}_{i:04d}.wav")
        audio.write_wav(segment, out)
    print(f"wrote {len(segments)} segments to {args.out_dir}")
    return 0


def cmd_record(args) -> int:
    if args.seconds <= 0:
        raise SystemExit("recording length must be positive")
    clip = audio.capture(_capture_source(args), args.seconds)
    audio.write_wav(clip, args.out)
    print(f"wrote {args.seconds:g}s to {args.out}")
    return 0


def cmd_realtime(args) -> int:
    model = nn.load_model(args.model)
    source = _capture_source(args)
    with open(args.log, "w") as session_log:
        for event in run_realtime(
            source, args.window_seconds, model,
            include_mel=args.mel, max_windows=args.max_windows,
        ):
            line = event.to_json_line()
            print(line, flush=True)
            session_log.write(line + "\n")
    print(f"session log in {args.log}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    svc = service.serve(
        args.port, args.model, _capture_source(args),
        window_s=args.window_seconds, static_dir=args.static_dir,
    )
    print(f"serving on http://127.0.0.1:{svc.port} (events at /events, history at /history)")
    try:
        while True:
            svc.wait_for_session_end(timeout=1.0)
    except KeyboardInterrupt:
        print("stopping")
    finally:
        svc.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emovox", description="Sung-voice emotion analysis toolkit"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="waveform + mel spectrogram artifacts for a WAV")
    p.add_argument("path")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("train", help="train the emotion classifier")
    p.add_argument("--dataset", help=f"dataset root (or ${DATASET_ENV_VAR})")
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--out", default="model.evx", help="best-checkpoint path")
    p.add_argument("--report", default="training_curves.csv")
    p.add_argument("--confusion", default="confusion.csv")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="segment-wise emotion report per WAV in a folder")
    p.add_argument("folder")
    p.add_argument("--model", required=True)
    p.add_argument("--segment-seconds", type=float, default=20.0)
    p.add_argument("--isolate", action="store_true", help="isolate vocals first")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("isolate", help="split a WAV into voice and accompaniment")
    p.add_argument("path")
    p.add_argument("--out-prefix")
    p.add_argument("--mask-csv", help="also dump the background mask")
    p.set_defaults(func=cmd_isolate)

    p = sub.add_parser("split", help="cut a WAV into fixed-length segments")
    p.add_argument("path")
    p.add_argument("--segment-seconds", type=float, required=True)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("record", help="capture audio to a WAV file")
    p.add_argument("--seconds", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--replay", help="replay a WAV instead of using a device")
    p.add_argument("--device", help="capture device identifier")
    p.set_defaults(func=cmd_record)

    p = sub.add_parser("realtime", help="classify capture windows as they arrive")
    p.add_argument("--model", required=True)
    p.add_argument("--window-seconds", type=float, default=3.0)
    p.add_argument("--replay")
    p.add_argument("--device")
    p.add_argument("--max-windows", type=int)
    p.add_argument("--mel", action="store_true", help="attach mel columns to events")
    p.add_argument("--log", default="realtime_session.ndjson")
    p.set_defaults(func=cmd_realtime)

    p = sub.add_parser("serve", help="stream predictions to the dashboard")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--model", required=True)
    p.add_argument("--window-seconds", type=float, default=3.0)
    p.add_argument("--replay")
    p.add_argument("--device")
    p.add_argument("--static-dir", help="serve the dashboard files from here")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (audio.WavError, audio.CaptureError, dsp.TooShortError,
            dataset.EmptyDatasetError, nn.ModelFormatError,
            nn.TrainingDivergedError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
