import numpy as np
import pytest

from emovox import dsp, separation
from emovox.audio import AudioClip

RATE = 22050
N_FFT = 2048
HOP = 256


def periodic_chord(n_samples, frame_loop=4):
    """Background that repeats exactly every `frame_loop` hops.

    Harmonics of rate/(frame_loop*hop) stay phase-aligned across the loop, so
    every frame_loop-th STFT frame is identical.
    """
    t = np.arange(n_samples) / RATE
    base = RATE / (frame_loop * HOP)
    return sum(
        0.25 * np.sin(2 * np.pi * (k * base * 16) * t) for k in (3, 5, 7)
    )


def burst_mixture(seconds=6.0):
    """Periodic chord plus a sine burst covering 10% of the duration."""
    n = int(seconds * RATE)
    background = periodic_chord(n)
    burst = np.zeros(n)
    b0, b1 = int(0.45 * n), int(0.55 * n)
    t = np.arange(n) / RATE
    burst[b0:b1] = 0.5 * np.sin(2 * np.pi * 601.0 * t[b0:b1])
    return background, burst, (b0, b1)


class TestSimilarityMatrix:
    def test_identical_columns(self):
        mag = np.tile(np.array([[1.0], [2.0], [3.0]]), (1, 4))
        sim = separation.similarity_matrix(mag)
        assert np.allclose(sim, 1.0)

    def test_orthogonal_columns(self):
        mag = np.array([[1.0, 0.0], [0.0, 1.0]])
        sim = separation.similarity_matrix(mag)
        assert sim[0, 1] == 0.0
        assert sim[1, 0] == 0.0
        assert sim[0, 0] == 1.0

    def test_zero_columns(self):
        mag = np.array([[0.0, 1.0], [0.0, 1.0]])
        sim = separation.similarity_matrix(mag)
        assert sim[0, 0] == 1.0  # a silent frame is similar to itself
        assert sim[0, 1] == 0.0 and sim[1, 0] == 0.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        mag = rng.uniform(0, 1, size=(8, 8))
        sim = separation.similarity_matrix(mag)
        for i in range(8):
            for j in range(8):
                expected = mag[:, i] @ mag[:, j] / (
                    np.linalg.norm(mag[:, i]) * np.linalg.norm(mag[:, j])
                )
                assert sim[i, j] == pytest.approx(expected, abs=1e-12)

    def test_symmetric(self):
        mag = np.random.default_rng(1).uniform(0, 1, size=(16, 12))
        sim = separation.similarity_matrix(mag)
        assert np.abs(sim - sim.T).max() <= 1e-12

    def test_needs_two_frames(self):
        with pytest.raises(ValueError):
            separation.similarity_matrix(np.ones((4, 1)))


class TestRepeatingModel:
    def test_identical_frames_give_exact_model(self):
        column = np.array([1.0, 0.5, 2.0, 0.0])
        mag = np.tile(column[:, None], (1, 10))
        sim = separation.similarity_matrix(mag)
        cfg = separation.SeparationConfig(k_neighbors=5, min_frame_gap=1)
        model = separation.repeating_model(mag, sim, cfg)
        assert np.array_equal(model, mag)

    def test_median_rejects_outlier(self):
        # Periodic background, one frame with a large extra component; the
        # hand-computed median over k=4 neighbors recovers the background.
        background = np.array([1.0, 2.0, 1.0, 0.5])
        mag = np.tile(background[:, None], (1, 9))
        mag[0, 4] += 10.0  # outlier frame
        sim = separation.similarity_matrix(mag)
        cfg = separation.SeparationConfig(k_neighbors=4, min_frame_gap=1)
        model = separation.repeating_model(mag, sim, cfg)
        assert np.allclose(model[:, 4], background)
        residual = mag - model
        assert residual[0, 4] == pytest.approx(10.0)
        assert np.abs(np.delete(residual, 4, axis=1)).max() <= 1e-12

    def test_never_exceeds_mixture(self):
        rng = np.random.default_rng(2)
        mag = rng.uniform(0, 1, size=(32, 40))
        sim = separation.similarity_matrix(mag)
        cfg = separation.SeparationConfig(k_neighbors=10, min_frame_gap=2)
        model = separation.repeating_model(mag, sim, cfg)
        assert np.all(model <= mag + 1e-15)


class TestWienerMask:
    def test_pure_background(self):
        mag = np.full((3, 3), 2.0)
        mask = separation.wiener_soft_mask(mag, mag)
        assert np.allclose(mask, 1.0, atol=1e-9)

    def test_pure_foreground(self):
        mag = np.full((3, 3), 2.0)
        mask = separation.wiener_soft_mask(np.zeros_like(mag), mag)
        assert np.allclose(mask, 0.0, atol=1e-9)

    def test_half_and_half(self):
        mag = np.full((3, 3), 2.0)
        mask = separation.wiener_soft_mask(mag / 2, mag, p=2.0)
        assert np.allclose(mask, 0.5, atol=1e-9)

    def test_range(self):
        rng = np.random.default_rng(3)
        mag = rng.uniform(0, 1, size=(16, 16))
        model = np.minimum(rng.uniform(0, 1, size=(16, 16)), mag)
        mask = separation.wiener_soft_mask(model, mag)
        assert mask.min() >= 0.0 and mask.max() <= 1.0


class TestSeparateVocals:
    def test_silence(self):
        clip = AudioClip(np.zeros(RATE), RATE)
        result = separation.separate_vocals(clip)
        assert np.allclose(result.foreground.samples, 0.0)
        assert np.allclose(result.background.samples, 0.0)

    def test_lengths_match_input(self):
        clip = AudioClip(periodic_chord(3 * RATE), RATE)
        result = separation.separate_vocals(clip)
        assert len(result.foreground) == len(clip)
        assert len(result.background) == len(clip)

    def test_mask_range_and_complement(self):
        clip = AudioClip(periodic_chord(2 * RATE), RATE)
        result = separation.separate_vocals(clip)
        assert result.mask.min() >= 0.0 and result.mask.max() <= 1.0
        # foreground mask is defined as 1 - background mask

    def test_additivity(self):
        background, burst, _ = burst_mixture(3.0)
        clip = AudioClip(background + burst, RATE)
        result = separation.separate_vocals(clip)
        total = result.foreground.samples + result.background.samples
        spec_frames = dsp.n_stft_frames(len(clip), separation.SeparationConfig().stft)
        covered = (spec_frames - 1) * HOP + N_FFT
        interior = slice(N_FFT, covered - N_FFT)
        assert np.abs(total[interior] - clip.samples[interior]).max() <= 1e-4

    def test_periodic_input_goes_to_background(self):
        clip = AudioClip(periodic_chord(3 * RATE), RATE)
        result = separation.separate_vocals(clip)
        cfg = separation.SeparationConfig()
        frames = dsp.n_stft_frames(len(clip), cfg.stft)
        covered = (frames - 1) * HOP + N_FFT
        interior = slice(N_FFT, covered - N_FFT)
        e_in = np.sum(clip.samples[interior] ** 2)
        e_fg = np.sum(result.foreground.samples[interior] ** 2)
        e_bg = np.sum(result.background.samples[interior] ** 2)
        assert e_fg <= 0.05 * e_in
        assert e_bg >= 0.95 * e_in

    def test_burst_snr_improves_6db(self):
        # Oracle measurement from the scratch prototype: mixture SNR 1.25 dB,
        # foreground SNR ~141 dB with the default (1 s) frame gap. The spec
        # threshold of >= 6 dB is frozen here with enormous margin.
        background, burst, (b0, b1) = burst_mixture(6.0)
        clip = AudioClip(background + burst, RATE)
        result = separation.separate_vocals(clip)

        def snr_db(x):
            window = slice(b0 + N_FFT, b1 - N_FFT)
            signal = np.sum(burst[window] ** 2)
            noise = np.sum((x[window] - burst[window]) ** 2)
            return 10 * np.log10(signal / noise)

        improvement = snr_db(result.foreground.samples) - snr_db(clip.samples)
        assert improvement >= 6.0

    def test_deterministic(self):
        background, burst, _ = burst_mixture(2.0)
        clip = AudioClip(background + burst, RATE)
        a = separation.separate_vocals(clip)
        b = separation.separate_vocals(clip)
        assert np.array_equal(a.foreground.samples, b.foreground.samples)
        assert np.array_equal(a.mask, b.mask)

    def test_too_short(self):
        with pytest.raises(dsp.TooShortError):
            separation.separate_vocals(AudioClip(np.zeros(1000), RATE))
