"""emovox: sung-voice emotion recognition and live biofeedback toolkit."""

from .audio import (
    AudioClip,
    CaptureSource,
    capture,
    get_duration,
    multiple_split,
    read_wav,
    resample,
    single_split,
    write_wav,
)
from .dsp import (
    FeatureConfig,
    FeatureVector,
    MelConfig,
    StftConfig,
    feature_vector,
    fft,
    istft,
    mel_filterbank,
    mel_scale,
    mel_spectrogram,
    mfcc,
    power_cepstrum,
    stft,
)
from .labels import EmotionLabel, LABEL_NAMES, N_CLASSES
from .dataset import Dataset, build_dataset, parse_ravdess_name, split_train_test
from .nn import (
    Model,
    OptimizerConfig,
    Prediction,
    TrainReport,
    build_model,
    confusion_matrix,
    cross_entropy,
    load_model,
    predict,
    save_model,
    train,
)
from .pipeline import SegmentReport, classify_clip, classify_segments, report_to_csv
from .realtime import PredictionEvent, run_realtime
from .separation import SeparationConfig, SeparationResult, separate_vocals
from .service import PredictionService, serve

__version__ = "0.1.0"
