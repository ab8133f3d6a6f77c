import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from limbeeg.errors import ConfigInvalid, EmptyBand, SegmentTooLong
from limbeeg.spectral import (
    BANDS, BAND_NAMES, PsdEstimate, WelchConfig, band_power, fft_radix2, hann,
    spectral_feature_block, total_power, welch_psd,
)

FS = 125.0


def direct_welch(x, m=128, step=64, nfft=256, fs=FS):
    """Loop oracle: explicit DFT sums over each windowed, mean-removed segment."""
    w = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(m) / m)
    k_norm = np.sum(w ** 2) / m
    freqs = np.arange(nfft // 2 + 1)
    n = np.arange(m)
    acc = np.zeros(freqs.size)
    count = 0
    for start in range(0, len(x) - m + 1, step):
        seg = x[start:start + m] - np.mean(x[start:start + m])
        for f in freqs:
            s = np.sum(seg * w * np.exp(-2j * np.pi * f * n / nfft))
            acc[f] += abs(s) ** 2 / (fs * k_norm * m)
        count += 1
    p = acc / count
    p[1:-1] *= 2
    return freqs * fs / nfft, p


def tone(f, n=500, amp=1.0, phase=0.3):
    return amp * np.sin(2 * np.pi * f * np.arange(n) / FS + phase)


class TestFft:
    @pytest.mark.parametrize("n", [1, 2, 8, 64, 256])
    def test_matches_numpy(self, rng, n):
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        np.testing.assert_allclose(fft_radix2(x), np.fft.fft(x), atol=1e-10)

    def test_batched_rows(self, rng):
        x = rng.normal(size=(5, 32))
        np.testing.assert_allclose(fft_radix2(x), np.fft.fft(x, axis=-1), atol=1e-10)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            fft_radix2(np.ones(12))


class TestWindowAndConfig:
    def test_periodic_hann(self):
        w = hann(4)
        np.testing.assert_allclose(w, [0.0, 0.5, 1.0, 0.5], atol=1e-15)

    def test_normalization_constant(self):
        cfg = WelchConfig()
        assert cfg.normalization == pytest.approx(np.mean(hann(128) ** 2), rel=1e-15)
        # periodic Hann: mean of w^2 is exactly 3/8
        assert cfg.normalization == pytest.approx(0.375, rel=1e-12)

    def test_frequency_grid_spans_nyquist(self):
        f = WelchConfig().frequencies()
        assert f[0] == 0.0 and f[-1] == pytest.approx(62.5)
        assert f.size == 129

    @pytest.mark.parametrize("kwargs", [
        {"segment_length": 1}, {"overlap_fraction": 1.0}, {"overlap_fraction": -0.1},
        {"fft_points": 100}, {"segment_length": 256, "fft_points": 128},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigInvalid):
            WelchConfig(**kwargs)


class TestWelch:
    def test_matches_loop_oracle(self, rng):
        x = rng.normal(size=500)
        f, p = direct_welch(x)
        psd = welch_psd(x)
        np.testing.assert_allclose(psd.frequencies, f, rtol=1e-15)
        np.testing.assert_allclose(psd.power, p, rtol=1e-9, atol=1e-18)

    def test_matches_scipy(self, rng):
        signal = pytest.importorskip("scipy.signal")
        x = rng.normal(size=500)
        f, p = signal.welch(x, fs=FS, window="hann", nperseg=128, noverlap=64, nfft=256,
                            detrend="constant", scaling="density")
        psd = welch_psd(x)
        np.testing.assert_allclose(psd.frequencies, f)
        np.testing.assert_allclose(psd.power, p, rtol=1e-9, atol=1e-15)

    def test_zero_signal(self):
        np.testing.assert_array_equal(welch_psd(np.zeros(500)).power, 0.0)

    def test_too_long_segment(self):
        with pytest.raises(SegmentTooLong):
            welch_psd(np.ones(100))

    def test_deterministic(self, rng):
        x = rng.normal(size=500)
        assert np.array_equal(welch_psd(x).power, welch_psd(x.copy()).power)

    @given(arrays(np.float64, 500, elements=st.floats(-1e3, 1e3, allow_nan=False)))
    def test_non_negative(self, x):
        assert np.all(welch_psd(x).power >= 0)

    def test_rows_match_single_channel_calls(self, rng):
        x = rng.normal(size=(3, 500))
        batch = welch_psd(x).power
        for i in range(3):
            np.testing.assert_array_equal(batch[i], welch_psd(x[i]).power)

    @pytest.mark.parametrize("f0", [5.0, 10.0, 20.0, 40.0])
    def test_tone_peak_at_nearest_bin(self, f0):
        psd = welch_psd(tone(f0))
        df = FS / 256
        assert int(np.argmax(psd.power)) == int(round(f0 / df))

    def test_white_noise_is_flat_and_sums_to_variance(self, rng):
        ratios, flat = [], []
        for _ in range(100):
            x = rng.normal(size=500)
            psd = welch_psd(x)
            ratios.append(total_power(psd) / np.var(x))
            flat.append(psd.power[5:120].mean())
        assert abs(np.mean(ratios) - 1.0) < 0.15
        # expected level for unit-variance white noise is 2 / fs
        assert abs(np.mean(flat) / (2.0 / FS) - 1.0) < 0.15


class TestBandPower:
    def test_alpha_tone(self):
        psd = welch_psd(tone(10.0))
        assert band_power(psd, BANDS["alpha"]) == pytest.approx(0.5, rel=0.02)
        others = sum(band_power(psd, BANDS[b]) for b in BAND_NAMES if b != "alpha")
        assert others < 0.01

    def test_zero_psd(self):
        psd = welch_psd(np.zeros(500))
        assert all(band_power(psd, BANDS[b]) == 0.0 for b in BAND_NAMES)

    def test_additivity(self, rng):
        psd = welch_psd(rng.normal(size=500))
        parts = sum(band_power(psd, BANDS[b]) for b in BAND_NAMES)
        assert parts == pytest.approx(band_power(psd, (0.5, 50.0)), abs=1e-9)
        assert parts <= total_power(psd)

    def test_linear_psd_integrates_exactly(self):
        f = np.arange(129) * FS / 256
        psd = PsdEstimate(f, 2.0 * f + 1.0)
        lo, hi = 8.0, 13.0
        assert band_power(psd, (lo, hi)) == pytest.approx((hi**2 - lo**2) + (hi - lo), rel=1e-12)

    def test_empty_band_warns(self):
        f = np.array([0.0, 10.0, 20.0])
        psd = PsdEstimate(f, np.ones(3))
        with pytest.warns(EmptyBand):
            assert band_power(psd, (11.0, 12.0)) == 0.0

    def test_band_outside_range(self):
        psd = welch_psd(np.ones(500))
        with pytest.raises(ValueError):
            band_power(psd, (60.0, 70.0))


class TestFeatureBlock:
    def test_length_and_zero_trial(self):
        out = spectral_feature_block(np.zeros((16, 500)))
        assert out.shape == (96,)
        np.testing.assert_array_equal(out, 0.0)

    def test_layout(self, rng):
        x = rng.normal(size=(16, 500))
        out = spectral_feature_block(x).reshape(16, 6)
        psd = welch_psd(x[4])
        assert out[4, 0] == pytest.approx(psd.power.mean(), rel=1e-12)
        for j, b in enumerate(BAND_NAMES, start=1):
            assert out[4, j] == pytest.approx(band_power(psd, BANDS[b]), rel=1e-12)

    def test_alpha_dominant_channel(self, rng):
        x = 0.05 * rng.normal(size=(16, 500))
        x[3] += tone(10.0)
        out = spectral_feature_block(x).reshape(16, 6)
        bands = out[3, 1:]
        assert BAND_NAMES[int(np.argmax(bands))] == "alpha"

    def test_no_warnings_on_default_grid(self, rng):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            spectral_feature_block(rng.normal(size=(16, 500)))
