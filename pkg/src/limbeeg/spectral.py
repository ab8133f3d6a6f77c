"""Welch power spectral density and EEG band features."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, EmptyBand, SegmentTooLong

SAMPLE_RATE_HZ = 125.0

BANDS = {
    "delta": (0.5, 4.0),
    "theta": (4.0, 8.0),
    "alpha": (8.0, 13.0),
    "beta": (13.0, 30.0),
    "gamma": (30.0, 50.0),
}
BAND_NAMES = tuple(BANDS)
SPECTRAL_FEATURE_NAMES = ("mean_psd",) + tuple(f"{b}_power" for b in BAND_NAMES)


def fft_radix2(x):
    """Iterative Cooley-Tukey FFT along the last axis; length must be a power of two."""
    a = np.asarray(x, dtype=complex)
    n = a.shape[-1]
    if n < 1 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((np.arange(n) >> b) & 1) << (bits - 1 - b)
    a = a[..., rev]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(a.shape[:-1] + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(a.shape)
        size *= 2
    return a


def hann(m: int) -> np.ndarray:
    """Periodic Hann window (the spectral-analysis variant)."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(m) / m)


@dataclass(frozen=True)
class WelchConfig:
    segment_length: int = 128
    overlap_fraction: float = 0.5
    fft_points: int = 256
    sample_rate_hz: float = SAMPLE_RATE_HZ
    window: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m = self.segment_length
        if m < 2:
            raise ConfigInvalid(f"segment length must be >= 2, got {m}")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise ConfigInvalid(f"overlap must be in [0, 1), got {self.overlap_fraction}")
        n = self.fft_points
        if n < m or n & (n - 1):
            raise ConfigInvalid(f"fft_points must be a power of two >= {m}, got {n}")
        if self.window is None:
            object.__setattr__(self, "window", hann(m))
        elif len(self.window) != m:
            raise ConfigInvalid("window length must equal segment length")

    @property
    def step(self) -> int:
        return max(1, int(round(self.segment_length * (1.0 - self.overlap_fraction))))

    @property
    def normalization(self) -> float:
        """K = (1/M) * sum(w**2)."""
        return float(np.sum(self.window ** 2) / self.segment_length)

    @property
    def scaling_factor(self) -> float:
        return 1.0 / self.sample_rate_hz

    def frequencies(self) -> np.ndarray:
        return np.arange(self.fft_points // 2 + 1) * self.sample_rate_hz / self.fft_points


@dataclass(frozen=True)
class PsdEstimate:
    frequencies: np.ndarray
    power: np.ndarray


def welch_psd(signal, cfg: WelchConfig | None = None) -> PsdEstimate:
    """Average of Hann-windowed, mean-removed periodograms, one-sided.

    ``signal`` may be 2-D (channels x samples); PSDs are then computed per row.
    """
    cfg = cfg or WelchConfig()
    x = np.asarray(signal, dtype=float)
    m = cfg.segment_length
    n = x.shape[-1]
    if m > n:
        raise SegmentTooLong(f"segment length {m} exceeds signal length {n}")
    starts = np.arange(0, n - m + 1, cfg.step)
    segments = np.stack([x[..., s:s + m] for s in starts], axis=-2)
    segments = segments - segments.mean(axis=-1, keepdims=True)
    padded = np.zeros(segments.shape[:-1] + (cfg.fft_points,))
    padded[..., :m] = segments * cfg.window
    spectrum = fft_radix2(padded)[..., : cfg.fft_points // 2 + 1]
    periodograms = cfg.scaling_factor / (cfg.normalization * m) * np.abs(spectrum) ** 2
    power = periodograms.mean(axis=-2)
    # fold negative frequencies onto the interior bins; DC and Nyquist stay single
    power[..., 1:-1] *= 2.0
    return PsdEstimate(cfg.frequencies(), power)


def _interp_integral(freqs, power, lo, hi):
    """Exact integral of the piecewise-linear PSD over [lo, hi]."""
    lo = max(lo, freqs[0])
    hi = min(hi, freqs[-1])
    if hi <= lo:
        return np.zeros(power.shape[:-1])
    inside = (freqs > lo) & (freqs < hi)
    grid = np.concatenate([[lo], freqs[inside], [hi]])
    vals = np.concatenate(
        [
            _interp(freqs, power, lo)[..., None],
            power[..., inside],
            _interp(freqs, power, hi)[..., None],
        ],
        axis=-1,
    )
    return np.trapezoid(vals, grid, axis=-1)


def _interp(freqs, power, f):
    idx = np.clip(np.searchsorted(freqs, f) - 1, 0, freqs.size - 2)
    t = (f - freqs[idx]) / (freqs[idx + 1] - freqs[idx])
    return power[..., idx] * (1.0 - t) + power[..., idx + 1] * t


def band_power(psd: PsdEstimate, band):
    """Trapezoidal integral of the PSD over ``band`` (interpolated at the edges)."""
    lo, hi = band
    f = psd.frequencies
    if lo < 0 or hi > f[-1] + 1e-12 or hi <= lo:
        raise ValueError(f"band {band} outside [0, {f[-1]}] Hz")
    if not np.any((f >= lo) & (f < hi)):
        warnings.warn(EmptyBand(f"no frequency bins inside {band}"), stacklevel=2)
        return np.zeros(psd.power.shape[:-1]) if psd.power.ndim > 1 else 0.0
    out = _interp_integral(f, psd.power, lo, hi)
    return float(out) if np.ndim(out) == 0 else out


def total_power(psd: PsdEstimate):
    return np.trapezoid(psd.power, psd.frequencies, axis=-1)


def spectral_feature_block(trial, cfg: WelchConfig | None = None) -> np.ndarray:
    """Mean PSD amplitude plus five band powers per channel (96 values for 16 channels)."""
    samples = np.asarray(getattr(trial, "samples", trial), dtype=float)
    psd = welch_psd(samples, cfg)
    cols = [psd.power.mean(axis=-1)]
    cols += [np.atleast_1d(band_power(psd, BANDS[b])) for b in BAND_NAMES]
    return np.stack(cols, axis=-1).reshape(-1)
