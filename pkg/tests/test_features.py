import re
import warnings

import numpy as np
import pytest

from limbeeg.errors import AllZeroChannel
from limbeeg.features import (
    N_FEATURES, FeatureConfig, extract_features, feature_config_from_dict, feature_names,
)
from limbeeg.ingest import Modality, TaskKind, Trial, normalize_channels
from limbeeg.spectral import WelchConfig, spectral_feature_block
from limbeeg.time_features import time_feature_block
from limbeeg.wavelet import wavelet_feature_block


def make_trial(rng, scale=20.0):
    return Trial("S01", TaskKind.DRF, Modality.IMAGERY, rng.normal(scale=scale, size=(16, 500)))


class TestNames:
    def test_count_and_uniqueness(self):
        names = feature_names()
        assert len(names) == N_FEATURES == 416 == len(set(names))

    def test_pattern_and_blocks(self):
        names = feature_names()
        assert all(re.fullmatch(r"ch(0\d|1[0-5])_(time|spec|wav)_\w+", n) for n in names)
        families = [n.split("_")[1] for n in names]
        assert families == ["time"] * 160 + ["spec"] * 96 + ["wav"] * 160

    def test_specific_positions(self):
        names = feature_names()
        assert names[0] == "ch00_time_mean"
        assert names[16] == "ch01_time_shannon_entropy"
        assert names[160] == "ch00_spec_mean_psd"
        assert names[162] == "ch00_spec_theta_power"
        assert names[163] == "ch00_spec_alpha_power"
        assert names[256] == "ch00_wav_cA4_mean_abs"
        assert names[415] == "ch15_wav_cD1_mean_sq"

    def test_other_level(self):
        names = feature_names(FeatureConfig(wavelet_level=2))
        assert len(names) == 160 + 96 + 16 * 2 * 3


class TestExtract:
    def test_concatenation_of_blocks(self, rng):
        t = make_trial(rng)
        fv = extract_features(t)
        n = normalize_channels(t)
        expected = np.concatenate([time_feature_block(n), spectral_feature_block(n),
                                   wavelet_feature_block(n)])
        np.testing.assert_array_equal(fv.values, expected)
        assert fv.source == ("S01", "DRF", "imagery")
        assert fv.source_tag == "S01/imagery/DRF"

    def test_normalization_makes_features_scale_free(self, rng):
        t = make_trial(rng)
        u = Trial(t.subject_id, t.task, t.modality, 7.0 * t.samples)
        np.testing.assert_allclose(extract_features(t).values, extract_features(u).values,
                                   rtol=1e-9, atol=1e-15)

    def test_zero_trial(self):
        t = Trial("S01", TaskKind.BEO, Modality.BASELINE, np.zeros((16, 500)))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fv = extract_features(t)
        assert fv.values.shape == (416,) and np.all(fv.values == 0)
        assert sum(issubclass(w.category, AllZeroChannel) for w in caught) == 16

    def test_deterministic(self, rng):
        t = make_trial(rng)
        assert np.array_equal(extract_features(t).values, extract_features(t).values)


class TestConfig:
    def test_hash_is_stable_and_sensitive(self):
        base = FeatureConfig()
        assert base.config_hash() == FeatureConfig().config_hash()
        assert base.config_hash() != FeatureConfig(entropy_bins=8).config_hash()
        assert base.config_hash() != FeatureConfig(WelchConfig(fft_points=512)).config_hash()

    def test_dict_round_trip(self):
        cfg = FeatureConfig(WelchConfig(64, 0.25, 128), 12, 3)
        assert feature_config_from_dict(cfg.as_dict()) == cfg
        assert feature_config_from_dict(cfg.as_dict()).config_hash() == cfg.config_hash()
