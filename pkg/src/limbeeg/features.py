"""Full per-trial feature vector: 160 time + 96 spectral + 160 wavelet values."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .ingest import N_CHANNELS, Trial, normalize_channels
from .spectral import SPECTRAL_FEATURE_NAMES, WelchConfig, spectral_feature_block
from .time_features import DEFAULT_ENTROPY_BINS, TIME_FEATURE_NAMES, time_feature_block
from .wavelet import wavelet_feature_block

N_FEATURES = 416


@dataclass(frozen=True)
class FeatureConfig:
    welch: WelchConfig = field(default_factory=WelchConfig)
    entropy_bins: int = DEFAULT_ENTROPY_BINS
    wavelet_level: int = 4

    def as_dict(self):
        w = self.welch
        return {
            "welch_segment": w.segment_length,
            "welch_overlap": w.overlap_fraction,
            "fft_points": w.fft_points,
            "sample_rate_hz": w.sample_rate_hz,
            "entropy_bins": self.entropy_bins,
            "wavelet_level": self.wavelet_level,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def wavelet_subbands(level: int = 4):
    return (f"cA{level}",) + tuple(f"cD{j}" for j in range(level, 0, -1))


def feature_names(cfg: FeatureConfig | None = None, n_channels: int = N_CHANNELS):
    """Canonical ``ch{NN}_{family}_{feature}`` names in vector order."""
    cfg = cfg or FeatureConfig()
    names = [f"ch{c:02d}_time_{f}" for c in range(n_channels) for f in TIME_FEATURE_NAMES]
    names += [f"ch{c:02d}_spec_{f}" for c in range(n_channels) for f in SPECTRAL_FEATURE_NAMES]
    names += [
        f"ch{c:02d}_wav_{band}_{stat}"
        for c in range(n_channels)
        for band in wavelet_subbands(cfg.wavelet_level)
        for stat in ("mean_abs", "mean_sq")
    ]
    return names


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    subject_id: str
    task: str
    modality: str

    @property
    def source(self):
        return (self.subject_id, self.task, self.modality)

    @property
    def source_tag(self) -> str:
        return f"{self.subject_id}/{self.modality}/{self.task}"

    @classmethod
    def from_tag(cls, values, tag: str):
        subject, modality, task = tag.split("/")
        return cls(np.asarray(values, dtype=float), subject, task, modality)


def extract_features(trial: Trial, cfg: FeatureConfig | None = None,
                     normalize: bool = True) -> FeatureVector:
    cfg = cfg or FeatureConfig()
    if normalize:
        trial = normalize_channels(trial)
    values = np.concatenate([
        time_feature_block(trial, cfg.entropy_bins),
        spectral_feature_block(trial, cfg.welch),
        wavelet_feature_block(trial, cfg.wavelet_level),
    ])
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite feature value")
    return FeatureVector(values, trial.subject_id, trial.task.value, trial.modality.value)


def feature_config_from_dict(d) -> FeatureConfig:
    return FeatureConfig(
        welch=WelchConfig(
            segment_length=int(d["welch_segment"]),
            overlap_fraction=float(d["welch_overlap"]),
            fft_points=int(d["fft_points"]),
            sample_rate_hz=float(d.get("sample_rate_hz", 125.0)),
        ),
        entropy_bins=int(d["entropy_bins"]),
        wavelet_level=int(d["wavelet_level"]),
    )

