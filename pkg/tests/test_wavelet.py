import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from limbeeg.errors import FeatureFailed, LengthMismatch, LevelTooDeep, TooShort
from limbeeg.wavelet import (
    DB4_DEC_HI, DB4_DEC_LO, DB4_REC_HI, DB4_REC_LO, WaveletDecomposition, coeff_length,
    dwt_single, idwt_single, level_schedule, max_level, wavedec, waverec,
    wavelet_channel_features, wavelet_feature_block,
)


def _sym(x, i):
    """Half-sample symmetric extension, evaluated one index at a time."""
    n = len(x)
    while i < 0 or i >= n:
        i = -i - 1 if i < 0 else 2 * n - 1 - i
    return x[i]


def scalar_dwt(x, dec_lo, dec_hi):
    """Loop oracle: c[k] = sum_j h[j] * x_sym(2k + 1 - j)."""
    out_len = (len(x) + 7) // 2
    a = [sum(dec_lo[j] * _sym(x, 2 * k + 1 - j) for j in range(8)) for k in range(out_len)]
    d = [sum(dec_hi[j] * _sym(x, 2 * k + 1 - j) for j in range(8)) for k in range(out_len)]
    return np.array(a), np.array(d)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestFilterBank:
    def test_lowpass_normalization(self):
        assert abs(np.sum(DB4_REC_LO ** 2) - 1.0) < 1e-12
        assert abs(np.sum(DB4_REC_LO) - math.sqrt(2.0)) < 1e-12

    def test_highpass_has_zero_mean_and_unit_norm(self):
        assert abs(np.sum(DB4_REC_HI)) < 1e-12
        assert abs(np.sum(DB4_REC_HI ** 2) - 1.0) < 1e-12

    def test_double_shift_orthogonality(self):
        h = DB4_REC_LO
        for shift in (2, 4, 6):
            assert abs(np.dot(h[shift:], h[:-shift])) < 1e-12

    def test_four_vanishing_moments(self):
        k = np.arange(8.0)
        for p in range(4):
            assert abs(np.sum(DB4_DEC_HI * k ** p)) < 1e-9 * max(1.0, 7.0 ** p)

    def test_analysis_filters_are_reversed_synthesis(self):
        np.testing.assert_array_equal(DB4_DEC_LO, DB4_REC_LO[::-1])
        np.testing.assert_array_equal(DB4_DEC_HI, DB4_REC_HI[::-1])


class TestSingleLevel:
    def test_matches_scalar_oracle(self, rng):
        for n in (8, 9, 17, 64, 101):
            x = rng.normal(size=n)
            a, d = dwt_single(x)
            ao, do = scalar_dwt(x, DB4_DEC_LO, DB4_DEC_HI)
            np.testing.assert_allclose(a, ao, atol=1e-13)
            np.testing.assert_allclose(d, do, atol=1e-13)

    def test_matches_pywavelets(self, rng):
        pywt = pytest.importorskip("pywt")
        x = rng.normal(size=500)
        a, d = dwt_single(x)
        pa, pd = pywt.dwt(x, "db4", mode="symmetric")
        np.testing.assert_allclose(a, pa, atol=1e-12)
        np.testing.assert_allclose(d, pd, atol=1e-12)

    def test_constant_signal(self):
        a, d = dwt_single(np.full(64, 3.0))
        np.testing.assert_allclose(d, 0.0, atol=1e-12)
        np.testing.assert_allclose(a, 3.0 * math.sqrt(2), rtol=1e-12)

    def test_ramp_interior_details_vanish(self):
        n = 64
        _, d = dwt_single(np.arange(n, dtype=float))
        # outputs whose 8-tap support stays inside the signal
        interior = d[3:(n - 2) // 2 + 1]
        np.testing.assert_allclose(interior, 0.0, atol=1e-10)

    def test_too_short(self):
        with pytest.raises(TooShort):
            dwt_single(np.ones(7))

    def test_coefficient_length_rule(self):
        for n in range(8, 80):
            a, d = dwt_single(np.zeros(n))
            assert a.size == d.size == (n + 8 - 1) // 2 == coeff_length(n)

    @given(arrays(np.float64, st.integers(8, 120), elements=finite))
    def test_single_step_inverse(self, x):
        a, d = dwt_single(x)
        y = idwt_single(a, d, x.size)
        assert np.max(np.abs(y - x)) <= 1e-8 * max(1.0, np.max(np.abs(x)))

    def test_inverse_rejects_inconsistent_length(self):
        a, d = dwt_single(np.ones(20))
        with pytest.raises(LengthMismatch):
            idwt_single(a, d, 40)
        with pytest.raises(LengthMismatch):
            idwt_single(a, d[:-1], 20)


class TestMultiLevel:
    def test_five_sequences_at_level_four(self, rng):
        dec = wavedec(rng.normal(size=500), 4)
        assert len(dec.coefficients()) == 5
        assert [c.size for c in dec.coefficients()] == [37, 37, 68, 130, 253]

    def test_schedule(self):
        assert level_schedule(500, 4) == [500, 253, 130, 68, 37]
        assert max_level(500) == 9
        assert max_level(8) == 1 and max_level(7) == 0

    def test_matches_pywavelets(self, rng):
        pywt = pytest.importorskip("pywt")
        x = rng.normal(size=500)
        ours = wavedec(x, 4).coefficients()
        ref = pywt.wavedec(x, "db4", mode="symmetric", level=4)
        assert len(ours) == len(ref)
        for c, r in zip(ours, ref):
            np.testing.assert_allclose(c, r, atol=1e-12)

    @pytest.mark.parametrize("level", [0, -1, 10])
    def test_invalid_levels(self, level):
        with pytest.raises(LevelTooDeep):
            wavedec(np.ones(500), level)

    @given(st.integers(8, 500), st.integers(0, 2**32 - 1))
    def test_round_trip_any_length(self, n, seed):
        x = np.random.default_rng(seed).normal(size=n)
        level = min(4, max_level(n))
        assert np.max(np.abs(waverec(wavedec(x, level)) - x)) <= 1e-8

    def test_zero_coefficients_reconstruct_zero(self):
        dec = wavedec(np.zeros(500), 4)
        np.testing.assert_array_equal(waverec(dec), np.zeros(500))

    def test_dropping_details_lowers_variance(self, rng):
        for _ in range(20):
            x = rng.normal(size=500)
            dec = wavedec(x, 4)
            low = WaveletDecomposition(dec.approx, tuple(np.zeros_like(d) for d in dec.details),
                                       4, 500)
            assert np.var(waverec(low)) <= np.var(x)

    def test_waverec_rejects_bad_lengths(self, rng):
        dec = wavedec(rng.normal(size=500), 4)
        broken = WaveletDecomposition(dec.approx, (dec.details[0][:-1],) + dec.details[1:], 4, 500)
        with pytest.raises(LengthMismatch):
            waverec(broken)
        with pytest.raises(LengthMismatch):
            waverec(WaveletDecomposition(dec.approx, dec.details[:3], 4, 500))

    def test_energy_exact_for_zero_margin_signals(self, rng):
        # with zero margins the extension adds nothing, so the orthogonal
        # filter bank must conserve energy exactly at every level
        for _ in range(20):
            x = np.zeros(500)
            x[180:320] = rng.normal(size=140)
            approx = x
            for _level in range(4):
                a, d = dwt_single(approx)
                assert abs(np.sum(a**2) + np.sum(d**2) - np.sum(approx**2)) <= 1e-10 * np.sum(approx**2)
                approx = a


class TestFeatureBlock:
    def test_length_and_zero_trial(self):
        out = wavelet_feature_block(np.zeros((16, 500)))
        assert out.shape == (160,)
        np.testing.assert_array_equal(out, 0.0)

    def test_statistics_are_means_of_coefficients(self, rng):
        x = rng.normal(size=500)
        feats = wavelet_channel_features(x, 4)
        for i, c in enumerate(wavedec(x, 4).coefficients()):
            assert feats[2 * i] == pytest.approx(np.abs(c).mean(), rel=1e-12)
            assert feats[2 * i + 1] == pytest.approx((c * c).mean(), rel=1e-12)

    def test_thirty_hertz_lands_in_detail_bands(self):
        t = np.arange(500) / 125.0
        feats = wavelet_channel_features(np.sin(2 * np.pi * 30.0 * t), 4)
        energy = dict(zip(("cA4", "cD4", "cD3", "cD2", "cD1"), feats[1::2]))
        assert energy["cD2"] + energy["cD3"] > energy["cA4"]
        assert max(energy, key=energy.get) == "cD2"

    def test_channel_permutation_consistency(self, rng):
        trial = rng.normal(size=(16, 500))
        perm = rng.permutation(16)
        base = wavelet_feature_block(trial).reshape(16, 10)
        permuted = wavelet_feature_block(trial[perm]).reshape(16, 10)
        np.testing.assert_array_equal(permuted, base[perm])

    def test_short_channel_warns_and_zeros(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = wavelet_feature_block(np.ones((2, 6)))
        assert np.all(out == 0)
        assert sum(issubclass(w.category, FeatureFailed) for w in caught) == 2
