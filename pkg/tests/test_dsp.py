import numpy as np
import pytest

from emovox import dsp
from emovox.audio import AudioClip

from conftest import sine


def naive_dft(frame, n):
    """O(n^2) DFT oracle: literal sum of x[t] * exp(-2*pi*i*k*t/n)."""
    x = np.zeros(n, dtype=complex)
    x[: len(frame)] = frame
    t = np.arange(n)
    return np.array([np.sum(x * np.exp(-2j * np.pi * k * t / n)) for k in range(n)])


def dct2_matrix(n):
    """Explicit orthonormal DCT-II matrix oracle."""
    k = np.arange(n)[:, None]
    t = np.arange(n)[None, :]
    mat = np.cos(np.pi * k * (2 * t + 1) / (2 * n)) * np.sqrt(2.0 / n)
    mat[0] /= np.sqrt(2.0)
    return mat


class TestFft:
    def test_impulse(self):
        out = dsp.fft([1.0], 8)
        assert np.allclose(out, np.ones(8), atol=1e-12)

    def test_dc(self):
        out = dsp.fft(np.ones(8), 8)
        expected = np.zeros(8, dtype=complex)
        expected[0] = 8.0
        assert np.allclose(out, expected, atol=1e-12)

    def test_cosine_bins(self):
        t = np.arange(8)
        frame = np.cos(2 * np.pi * 3 * t / 8)
        out = dsp.fft(frame, 8)
        oracle = naive_dft(frame, 8)
        assert np.abs(out - oracle).max() <= 1e-9
        assert out[3].real == pytest.approx(4.0, abs=1e-9)
        assert out[5].real == pytest.approx(4.0, abs=1e-9)

    @pytest.mark.parametrize("n", [8, 64, 512])
    def test_matches_naive_dft(self, n):
        rng = np.random.default_rng(n)
        for _ in range(100):
            frame = rng.uniform(-1, 1, n)
            assert np.abs(dsp.fft(frame, n) - naive_dft(frame, n)).max() <= 1e-9

    def test_zero_padding(self):
        frame = np.array([1.0, -0.5, 0.25])
        assert np.abs(dsp.fft(frame, 16) - naive_dft(frame, 16)).max() <= 1e-9

    def test_parseval(self):
        rng = np.random.default_rng(11)
        for n in (8, 64, 512):
            frame = rng.normal(size=n)
            spectrum = dsp.fft(frame, n)
            time_energy = np.sum(frame**2)
            freq_energy = np.sum(np.abs(spectrum) ** 2) / n
            assert abs(time_energy - freq_energy) / time_energy <= 1e-6

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            dsp.fft(np.zeros(5), 12)


class TestStft:
    def test_silence(self):
        clip = AudioClip(np.zeros(8192), 22050)
        spec = dsp.stft(clip, dsp.StftConfig())
        assert np.all(spec.bins == 0)
        assert spec.bins.shape[0] == 1025

    def test_tone_bin(self):
        clip = AudioClip(sine(440.0, 1.0, 22050, 0.8), 22050)
        spec = dsp.stft(clip, dsp.StftConfig())
        mags = spec.magnitude()
        # 440 Hz lands in bin round(440 * 2048 / 22050) = 41
        assert np.all(mags.argmax(axis=0) == 41)

    def test_frame_count_law(self):
        cfg = dsp.StftConfig(n_fft=2048, hop=512)
        for n in (2048, 2049, 4096, 10000, 22050):
            clip = AudioClip(np.random.default_rng(n).uniform(-1, 1, n), 22050)
            spec = dsp.stft(clip, cfg)
            assert spec.n_frames == (n - 2048) // 512 + 1

    def test_too_short(self):
        with pytest.raises(dsp.TooShortError):
            dsp.stft(AudioClip(np.zeros(1000), 22050), dsp.StftConfig())

    def test_hop_must_divide_n_fft(self):
        with pytest.raises(ValueError):
            dsp.StftConfig(n_fft=2048, hop=500)


class TestIstft:
    @pytest.mark.parametrize("hop", [512, 1024])
    def test_round_trip(self, hop):
        rng = np.random.default_rng(hop)
        clip = AudioClip(rng.uniform(-1, 1, 22050), 22050)
        cfg = dsp.StftConfig(n_fft=2048, hop=hop)
        spec = dsp.stft(clip, cfg)
        back = dsp.istft(spec, length=len(clip))
        covered = (spec.n_frames - 1) * hop + 2048
        interior = slice(2048, covered - 2048)
        assert np.abs(back.samples[interior] - clip.samples[interior]).max() <= 1e-6

    def test_silence(self):
        spec = dsp.stft(AudioClip(np.zeros(8192), 22050), dsp.StftConfig())
        back = dsp.istft(spec)
        assert np.all(back.samples == 0)

    def test_energy_preserved(self):
        rng = np.random.default_rng(99)
        clip = AudioClip(rng.uniform(-1, 1, 22050), 22050)
        cfg = dsp.StftConfig()
        spec = dsp.stft(clip, cfg)
        back = dsp.istft(spec, length=len(clip))
        covered = (spec.n_frames - 1) * cfg.hop + cfg.n_fft
        interior = slice(2048, covered - 2048)
        e_in = np.sum(clip.samples[interior] ** 2)
        e_out = np.sum(back.samples[interior] ** 2)
        assert abs(e_out - e_in) / e_in <= 1e-3


class TestPowerCepstrum:
    def test_impulse_train_fundamental(self):
        # Period 64 makes an equal comb at quefrencies 64, 128, ...; 64 is
        # the first tooth and ties the global off-zero max.
        frame = np.zeros(1024)
        frame[::64] = 1.0
        ceps = dsp.power_cepstrum(frame, 1024)
        off_zero = ceps[1:513]
        assert int(np.argmax(ceps[1:65])) + 1 == 64
        assert ceps[64] >= 0.999 * off_zero.max()

    def test_filtered_impulse_train_peak(self):
        rng = np.random.default_rng(7)
        frame = np.zeros(1024)
        frame[::64] = 1.0
        kernel = np.exp(-np.arange(32) / 6.0) * rng.normal(1, 0.1, 32)
        voiced = np.convolve(frame, kernel)[:1024] * dsp.hann_window(1024)
        ceps = dsp.power_cepstrum(voiced, 1024)
        assert int(np.argmax(ceps[1:513])) + 1 == 64

    def test_white_noise_has_no_dominant_peak(self):
        hits = 0
        for seed in range(100):
            frame = np.random.default_rng(seed).normal(size=1024)
            ceps = dsp.power_cepstrum(frame, 1024)
            if ceps[1:513].max() < 0.5 * ceps[0]:
                hits += 1
        assert hits == 100

    def test_constant_frame(self):
        ceps = dsp.power_cepstrum(np.full(512, 0.7), 512)
        assert ceps[0] > 0
        assert ceps[1:].max() <= 1e-3 * ceps[0]


class TestMelScale:
    def test_zero(self):
        assert dsp.mel_scale(0.0) == 0.0

    def test_700hz(self):
        assert dsp.mel_scale(700.0) == pytest.approx(781.1728387480312, abs=1e-9)

    def test_strictly_increasing(self):
        freqs = np.linspace(0, 11025, 2000)
        mels = dsp.mel_scale(freqs)
        assert np.all(np.diff(mels) > 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            dsp.mel_scale(-1.0)


class TestMelFilterbank:
    def test_no_empty_filters(self):
        for n_mels in (10, 40, 259):
            fb = dsp.mel_filterbank(n_mels, 2048, 22050)
            assert fb.shape == (n_mels, 1025)
            assert np.all(fb >= 0)
            assert np.all(fb.sum(axis=1) > 0)

    def test_centers_increasing(self):
        centers = dsp.mel_filter_centers_hz(40, 0.0, 11025.0)
        assert np.all(np.diff(centers) > 0)

    def test_centers_match_independent_recomputation(self):
        # Oracle: equally spaced mel points inverted to Hz by the closed form.
        n_mels = 10
        lo = 2595.0 * np.log10(1.0)
        hi = 2595.0 * np.log10(1.0 + 11025.0 / 700.0)
        mel_points = np.linspace(lo, hi, n_mels + 2)[1:-1]
        expected = 700.0 * (10.0 ** (mel_points / 2595.0) - 1.0)
        centers = dsp.mel_filter_centers_hz(n_mels, 0.0, 11025.0)
        assert np.abs(centers / expected - 1.0).max() <= 1e-6

    def test_support_in_range(self):
        fb = dsp.mel_filterbank(20, 2048, 22050, f_min_hz=300.0, f_max_hz=8000.0)
        bin_hz = np.arange(1025) * (22050 / 2048)
        active = fb.sum(axis=0) > 0
        assert bin_hz[active].min() >= 300.0
        assert bin_hz[active].max() <= 8000.0

    def test_f_max_above_nyquist_rejected(self):
        with pytest.raises(ValueError):
            dsp.mel_filterbank(10, 2048, 22050, f_max_hz=12000.0)

    def test_too_many_bands_rejected(self):
        with pytest.raises(ValueError):
            dsp.mel_filterbank(2000, 2048, 22050)


class TestMelSpectrogram:
    def test_silence_floor(self):
        clip = AudioClip(np.zeros(8192), 22050)
        mel = dsp.mel_spectrogram(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=40))
        assert np.allclose(mel.energies, -100.0)

    def test_tone_band(self):
        clip = AudioClip(sine(440.0, 1.0, 22050, 0.8), 22050)
        mel = dsp.mel_spectrogram(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=40))
        centers = dsp.mel_filter_centers_hz(40, 0.0, 11025.0)
        expected_band = int(np.argmin(np.abs(centers - 440.0)))
        band = int(np.bincount(mel.energies.argmax(axis=0)).argmax())
        assert band == expected_band

    def test_shape(self):
        clip = AudioClip(np.random.default_rng(0).uniform(-1, 1, 22050), 22050)
        spec = dsp.stft(clip, dsp.StftConfig())
        mel = dsp.mel_spectrogram(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=64))
        assert mel.energies.shape == (64, spec.n_frames)

    def test_linear_energies_nonnegative(self):
        clip = AudioClip(np.random.default_rng(1).uniform(-1, 1, 22050), 22050)
        mel = dsp.mel_spectrogram(
            clip, dsp.StftConfig(), dsp.MelConfig(n_mels=64), log_scaled=False
        )
        assert np.all(mel.energies >= 0)


class TestMfcc:
    def test_constant_column(self):
        column = np.full((32, 1), 2.5)
        coeffs = dsp.dct2_ortho(column)
        assert coeffs[0, 0] == pytest.approx(2.5 * np.sqrt(32))
        assert np.abs(coeffs[1:]).max() <= 1e-12

    def test_orthonormal_round_trip(self):
        rng = np.random.default_rng(5)
        mat = rng.normal(size=(32, 7))
        coeffs = dsp.dct2_ortho(mat)
        back = dct2_matrix(32).T @ coeffs
        assert np.abs(back - mat).max() <= 1e-9

    def test_matches_explicit_matrix(self):
        rng = np.random.default_rng(6)
        mat = rng.normal(size=(24, 5))
        assert np.abs(dsp.dct2_ortho(mat) - dct2_matrix(24) @ mat).max() <= 1e-9

    def test_output_shape(self):
        clip = AudioClip(sine(330.0, 1.0, 22050, 0.5), 22050)
        out = dsp.mfcc(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=40), n_coeffs=13)
        spec = dsp.stft(clip, dsp.StftConfig())
        assert out.shape == (13, spec.n_frames)

    def test_too_many_coeffs(self):
        clip = AudioClip(np.zeros(4096), 22050)
        with pytest.raises(ValueError):
            dsp.mfcc(clip, dsp.StftConfig(), dsp.MelConfig(n_mels=10), n_coeffs=11)


class TestFeatureVector:
    def test_default_length_259(self):
        clip = AudioClip(sine(440.0, 1.0, 22050, 0.5), 22050)
        fv = dsp.feature_vector(clip)
        assert fv.length == 259
        assert fv.values.shape == (259,)

    def test_silence_is_floor(self):
        fv = dsp.feature_vector(AudioClip(np.zeros(8192), 22050))
        assert np.allclose(fv.values, -100.0)

    def test_deterministic(self):
        clip = AudioClip(sine(440.0, 1.0, 44100, 0.5), 44100)
        a = dsp.feature_vector(clip)
        b = dsp.feature_vector(AudioClip(clip.samples.copy(), 44100))
        assert np.array_equal(a.values, b.values)

    def test_resamples_to_canonical_rate(self):
        # The same tone at two rates should land close in feature space.
        a = dsp.feature_vector(AudioClip(sine(440.0, 1.0, 44100, 0.5), 44100))
        b = dsp.feature_vector(AudioClip(sine(440.0, 1.0, 22050, 0.5), 22050))
        assert int(np.argmax(a.values)) == int(np.argmax(b.values))

    def test_too_short(self):
        with pytest.raises(dsp.TooShortError):
            dsp.feature_vector(AudioClip(np.zeros(500), 22050))

    def test_mfcc_variant_length(self):
        cfg = dsp.FeatureConfig(variant="mfcc")
        fv = dsp.feature_vector(AudioClip(sine(440.0, 1.0, 22050, 0.5), 22050), cfg)
        assert fv.length == 259


class TestArtifacts:
    def test_csv_round_trip_9_digits(self, tmp_path):
        mat = np.random.default_rng(8).normal(size=(7, 11))
        path = tmp_path / "m.csv"
        dsp.save_matrix_csv(mat, path)
        back = dsp.load_matrix_csv(path)
        assert back.shape == mat.shape
        assert np.abs(back - mat).max() <= np.abs(mat).max() * 1e-8

    def test_pgm_header_and_size(self, tmp_path):
        mat = np.linspace(-100, 0, 12).reshape(3, 4)
        path = tmp_path / "m.pgm"
        dsp.save_pgm(mat, path)
        data = path.read_bytes()
        assert data.startswith(b"P5\n4 3\n255\n")
        assert len(data) == len(b"P5\n4 3\n255\n") + 12

    def test_spectrogram_db_floor(self):
        spec = dsp.stft(AudioClip(np.zeros(8192), 22050), dsp.StftConfig())
        grid = dsp.spectrogram_db(spec)
        assert np.all(grid == -100.0)
