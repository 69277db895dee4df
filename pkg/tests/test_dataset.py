import numpy as np
import pytest

from emovox import dataset, dsp
from emovox.labels import EmotionLabel

from conftest import sine, write_pcm16_wav

# Small feature recipe keeps ingestion tests quick; the 259-length default
# is exercised in the nn/acceptance suites.
FAST_CFG = dsp.FeatureConfig(length=32)


def song_name(emotion_code, actor=1, statement=1, repetition=1):
    return f"03-02-{emotion_code:02d}-01-{statement:02d}-{repetition:02d}-{actor:02d}.wav"


@pytest.fixture(scope="module")
def ravdess_root(tmp_path_factory):
    """A miniature tree following the dataset's naming convention."""
    root = tmp_path_factory.mktemp("ravdess")
    actor_dir = root / "Actor_01"
    actor_dir.mkdir()
    rng = np.random.default_rng(0)
    # Two song files per in-model emotion, distinct tones per emotion.
    for code in range(1, 7):
        for rep in (1, 2):
            tone = sine(200.0 + 60 * code + 5 * rep, 0.4, 22050, 0.4)
            tone += rng.normal(0, 0.01, len(tone))
            write_pcm16_wav(actor_dir / song_name(code, repetition=rep), tone, 22050)
    # A speech-channel file (excluded by default) and a non-dataset name.
    write_pcm16_wav(
        actor_dir / "03-01-03-01-01-01-01.wav", sine(300.0, 0.4, 22050, 0.4), 22050
    )
    write_pcm16_wav(actor_dir / "notes.wav", sine(100.0, 0.4, 22050, 0.4), 22050)
    return root


class TestParseName:
    def test_worked_example(self):
        # Audio-only song clip, fearful, normal intensity, statement 2,
        # first repetition, actor 12.
        meta = dataset.parse_ravdess_name("03-02-06-01-02-01-12.wav")
        assert meta.modality == 3
        assert meta.vocal_channel == 2
        assert meta.emotion_code == 6
        assert meta.intensity == 1
        assert meta.statement == 2
        assert meta.repetition == 1
        assert meta.actor_id == 12
        assert meta.is_song
        assert meta.emotion_label is EmotionLabel.FEARFUL

    def test_full_path_accepted(self):
        meta = dataset.parse_ravdess_name("/data/Actor_05/03-02-01-01-01-01-05.wav")
        assert meta.actor_id == 5

    def test_six_fields_malformed(self):
        with pytest.raises(dataset.MalformedNameError):
            dataset.parse_ravdess_name("03-02-06-01-02-01.wav")

    def test_speech_channel_parses_but_is_not_song(self):
        meta = dataset.parse_ravdess_name("03-01-05-01-01-01-03.wav")
        assert not meta.is_song
        assert meta.emotion_label is EmotionLabel.ANGRY

    def test_out_of_model_codes_parse(self):
        for code in (7, 8):  # disgust, surprised: valid but outside the model
            meta = dataset.parse_ravdess_name(song_name(code))
            assert meta.in_model is False
            assert meta.emotion_label is None

    def test_unknown_emotion_code(self):
        with pytest.raises(dataset.UnknownEmotionCodeError):
            dataset.parse_ravdess_name("03-02-09-01-01-01-01.wav")

    def test_actor_out_of_range(self):
        with pytest.raises(dataset.MalformedNameError):
            dataset.parse_ravdess_name("03-02-03-01-01-01-25.wav")

    def test_parse_is_injective_on_fields(self):
        names = {
            song_name(code, actor=a, statement=s, repetition=r)
            for code in (1, 4) for a in (1, 9) for s in (1, 2) for r in (1, 2)
        }
        metas = {dataset.parse_ravdess_name(n) for n in names}
        assert len(metas) == len(names)


class TestBuildDataset:
    def test_counts_and_filtering(self, ravdess_root):
        ds = dataset.build_dataset(str(ravdess_root), FAST_CFG)
        assert len(ds) == 12  # 6 emotions x 2 repetitions; speech/odd excluded
        counts = ds.class_counts()
        assert all(counts[label] == 2 for label in EmotionLabel)
        assert ds.feature_length == 32

    def test_include_speech_flag(self, ravdess_root):
        ds = dataset.build_dataset(str(ravdess_root), FAST_CFG, include_speech=True)
        assert len(ds) == 13

    def test_deterministic_and_cached(self, ravdess_root):
        a = dataset.build_dataset(str(ravdess_root), FAST_CFG)
        b = dataset.build_dataset(str(ravdess_root), FAST_CFG)  # cache hit path
        xa, ya = a.to_arrays()
        xb, yb = b.to_arrays()
        assert np.array_equal(ya, yb)
        # Cached values go through a 9-significant-digit CSV.
        assert np.abs(xa - xb).max() <= 1e-6
        assert (ravdess_root / ".feature_cache").exists()

    def test_empty_directory(self, tmp_path):
        with pytest.raises(dataset.EmptyDatasetError):
            dataset.build_dataset(str(tmp_path), FAST_CFG)

    def test_unreadable_files_skipped(self, ravdess_root, tmp_path):
        import shutil

        root = tmp_path / "broken"
        shutil.copytree(ravdess_root, root)
        shutil.rmtree(root / ".feature_cache", ignore_errors=True)
        bad = root / "Actor_01" / song_name(2, statement=2)
        bad.write_bytes(b"not audio at all")
        ds = dataset.build_dataset(str(root), FAST_CFG, use_cache=False)
        assert len(ds) == 12  # the corrupt extra file is skipped, not fatal


class TestSplitTrainTest:
    def _toy_dataset(self, n_per_class=None):
        rng = np.random.default_rng(42)
        counts = n_per_class or {label: 17 for label in EmotionLabel}
        items = []
        for label, n in counts.items():
            for _ in range(n):
                fv = dsp.FeatureVector(values=rng.normal(size=8), length=8)
                items.append((fv, label, None))
        return dataset.Dataset(items=items, feature_length=8)

    def test_exact_80_20(self):
        ds = self._toy_dataset(
            {label: n for label, n in zip(EmotionLabel, [17, 17, 17, 17, 16, 16])}
        )
        assert len(ds) == 100
        train, test = dataset.split_train_test(ds, 0.2, seed=7)
        assert len(test) == 20
        assert len(train) == 80

    def test_stratification_within_one(self):
        ds = self._toy_dataset({label: 10 for label in EmotionLabel})
        _, test = dataset.split_train_test(ds, 0.2, seed=1)
        counts = test.class_counts()
        for label in EmotionLabel:
            assert abs(counts[label] - 2) <= 1

    def test_partition_law(self):
        ds = self._toy_dataset()
        train, test = dataset.split_train_test(ds, 0.25, seed=3)
        assert len(train) + len(test) == len(ds)
        ids = {id(item) for item in ds.items}
        split_ids = {id(item) for item in train.items} | {id(item) for item in test.items}
        assert split_ids == ids

    def test_deterministic(self):
        ds = self._toy_dataset()
        a_train, a_test = dataset.split_train_test(ds, 0.2, seed=11)
        b_train, b_test = dataset.split_train_test(ds, 0.2, seed=11)
        assert [id(i) for i in a_test.items] == [id(i) for i in b_test.items]
        assert [id(i) for i in a_train.items] == [id(i) for i in b_train.items]

    def test_different_seeds_differ(self):
        ds = self._toy_dataset()
        _, a = dataset.split_train_test(ds, 0.2, seed=1)
        _, b = dataset.split_train_test(ds, 0.2, seed=2)
        assert [id(i) for i in a.items] != [id(i) for i in b.items]

    def test_bad_fraction(self):
        ds = self._toy_dataset()
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                dataset.split_train_test(ds, bad, seed=0)
