"""Time-domain EEG descriptors, ten per channel.

All variances are population variances (divide by N).
"""
from __future__ import annotations

import warnings

import numpy as np

from .errors import DegenerateRange, FeatureFailed, TooShort, ZeroVariance

TIME_FEATURE_NAMES = (
    "mean",
    "sd",
    "mean_energy",
    "mean_teager_energy",
    "nfd",
    "nsd",
    "shannon_entropy",
    "hjorth_activity",
    "hjorth_mobility",
    "hjorth_complexity",
)
DEFAULT_ENTROPY_BINS = 16


def _as_signal(signal, min_len, what):
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or x.size < min_len:
        raise TooShort(f"{what} needs at least {min_len} samples, got {x.size}")
    return x


def basic_stats(signal):
    """Return ``(mean, sd, mean_energy)``."""
    x = _as_signal(signal, 2, "basic_stats")
    mean = float(np.mean(x))
    sd = float(np.sqrt(np.mean((x - mean) ** 2)))
    return mean, sd, float(np.mean(x * x))


def mean_teager_energy(signal) -> float:
    x = _as_signal(signal, 3, "mean_teager_energy")
    return float(np.mean(x[1:-1] ** 2 - x[:-2] * x[2:]))


def normalized_differences(signal):
    """Mean absolute first and second differences, each divided by the SD."""
    x = _as_signal(signal, 3, "normalized_differences")
    sd = float(np.std(x))
    if sd == 0.0:
        warnings.warn(ZeroVariance("constant signal: NFD/NSD set to 0"), stacklevel=2)
        return 0.0, 0.0
    nfd = np.mean(np.abs(np.diff(x))) / sd
    nsd = np.mean(np.abs(x[2:] - x[:-2])) / sd
    return float(nfd), float(nsd)


def shannon_entropy(signal, bins: int = DEFAULT_ENTROPY_BINS) -> float:
    """Entropy in bits of the amplitude histogram over [min, max]."""
    x = _as_signal(signal, 1, "shannon_entropy")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        warnings.warn(DegenerateRange("constant signal: entropy set to 0"), stacklevel=2)
        return 0.0
    # index by relative position so the bins scale exactly with the data range
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(np.intp)
    counts = np.bincount(np.clip(idx, 0, bins - 1), minlength=bins)
    p = counts[counts > 0] / x.size
    return float(max(0.0, -np.sum(p * np.log2(p))))


def hjorth(signal):
    """Return ``(activity, mobility, complexity)``."""
    x = _as_signal(signal, 3, "hjorth")
    var_x = float(np.var(x))
    if var_x == 0.0:
        warnings.warn(ZeroVariance("constant signal: Hjorth parameters set to 0"), stacklevel=2)
        return 0.0, 0.0, 0.0
    dx = np.diff(x)
    var_dx = float(np.var(dx))
    mobility = np.sqrt(var_dx / var_x)
    if var_dx == 0.0:
        return var_x, float(mobility), 0.0
    mobility_dx = np.sqrt(np.var(np.diff(dx)) / var_dx)
    return var_x, float(mobility), float(mobility_dx / mobility)


def channel_time_features(signal, entropy_bins: int = DEFAULT_ENTROPY_BINS) -> np.ndarray:
    mean, sd, me = basic_stats(signal)
    nfd, nsd = normalized_differences(signal)
    activity, mobility, complexity = hjorth(signal)
    # sd**2 keeps the activity/SD identity exact rather than approximately equal
    return np.array([
        mean, sd, me, mean_teager_energy(signal), nfd, nsd,
        shannon_entropy(signal, entropy_bins), sd * sd, mobility, complexity,
    ])


def time_feature_block(trial, entropy_bins: int = DEFAULT_ENTROPY_BINS) -> np.ndarray:
    """Ten features per channel, channel-major (160 values for a 16-channel trial).

    A channel whose features cannot be computed contributes zeros and one warning.
    """
    samples = np.asarray(getattr(trial, "samples", trial), dtype=float)
    n_feat = len(TIME_FEATURE_NAMES)
    out = np.zeros(samples.shape[0] * n_feat)
    for ch, signal in enumerate(samples):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                values = channel_time_features(signal, entropy_bins)
            except TooShort as exc:
                caught.append(exc)
                values = np.zeros(n_feat)
        if caught:
            warnings.warn(
                FeatureFailed(f"channel {ch}: degenerate signal, affected features set to 0"),
                stacklevel=2,
            )
        out[ch * n_feat:(ch + 1) * n_feat] = values
    return out
