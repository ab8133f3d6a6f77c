"""Daubechies-4 discrete wavelet transform with half-point symmetric extension.

The coefficient layout follows the common toolbox convention: a length-N
input yields ``(N + 7) // 2`` approximation and detail coefficients, and the
multilevel decomposition is returned as ``[cA_L, cD_L, ..., cD_1]``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import FeatureFailed, LengthMismatch, LevelTooDeep, TooShort

# Daubechies (1992) tabulation, scaling filter with 4 vanishing moments.
DB4_REC_LO = np.array([
    0.23037781330889650086,
    0.71484657055291564709,
    0.63088076792985890788,
    -0.02798376941685985422,
    -0.18703481171909308407,
    0.03084138183556076363,
    0.03288301166688519973,
    -0.01059740178506903211,
])
TAPS = DB4_REC_LO.size
DB4_REC_HI = DB4_REC_LO[::-1] * np.array([(-1.0) ** k for k in range(TAPS)])
DB4_DEC_LO = DB4_REC_LO[::-1].copy()
DB4_DEC_HI = DB4_REC_HI[::-1].copy()

SUBBAND_NAMES = ("cA4", "cD4", "cD3", "cD2", "cD1")


def filter_bank():
    """Return ``(dec_lo, dec_hi, rec_lo, rec_hi)`` for db4."""
    return DB4_DEC_LO.copy(), DB4_DEC_HI.copy(), DB4_REC_LO.copy(), DB4_REC_HI.copy()


def coeff_length(n: int) -> int:
    return (n + TAPS - 1) // 2


def dwt_single(signal):
    """One analysis step: filter with the db4 pair and keep every second sample.

    Returns ``(approx, detail)``, each of length ``(len(signal) + 7) // 2``.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or x.size < TAPS:
        raise TooShort(f"dwt needs at least {TAPS} samples, got {x.size}")
    return _analysis(x)


def _analysis(x):
    n = x.size
    out_len = coeff_length(n)
    ext = np.pad(x, TAPS - 1, mode="symmetric")
    # output o is centred on input sample 2*o + 1
    approx = np.correlate(ext, DB4_REC_LO, mode="valid")[1::2][:out_len]
    detail = np.correlate(ext, DB4_REC_HI, mode="valid")[1::2][:out_len]
    return approx, detail


def idwt_single(approx, detail, length: int | None = None):
    """Inverse of :func:`dwt_single`.

    ``length`` selects the output size; it defaults to ``2 * len(approx) - 6``
    (an odd original length needs the explicit value).
    """
    a = np.asarray(approx, dtype=float)
    d = np.asarray(detail, dtype=float)
    if a.shape != d.shape or a.ndim != 1:
        raise LengthMismatch(f"approx/detail shapes differ: {a.shape} vs {d.shape}")
    if length is None:
        length = 2 * a.size - (TAPS - 2)
    if coeff_length(length) != a.size:
        raise LengthMismatch(f"{a.size} coefficients cannot reconstruct {length} samples")
    up_a = np.zeros(2 * a.size)
    up_d = np.zeros(2 * a.size)
    up_a[::2] = a
    up_d[::2] = d
    full = np.convolve(up_a, DB4_REC_LO) + np.convolve(up_d, DB4_REC_HI)
    return full[TAPS - 2:TAPS - 2 + length]


def max_level(n: int) -> int:
    """Deepest level at which every analysis step still sees >= 8 samples."""
    level = 0
    while n >= TAPS:
        n = coeff_length(n)
        level += 1
    return level


@dataclass(frozen=True)
class WaveletDecomposition:
    approx: np.ndarray
    details: tuple  # cD_L, ..., cD_1
    level: int
    signal_length: int

    def coefficients(self):
        """Toolbox-style list ``[cA_L, cD_L, ..., cD_1]``."""
        return [self.approx, *self.details]

    def lengths(self):
        return [self.signal_length] + [d.size for d in reversed(self.details)]


def level_schedule(n: int, level: int):
    lengths = [n]
    for _ in range(level):
        lengths.append(coeff_length(lengths[-1]))
    return lengths


def wavedec(signal, level: int = 4) -> WaveletDecomposition:
    x = np.asarray(signal, dtype=float)
    if level < 1:
        raise LevelTooDeep(f"level must be >= 1, got {level}")
    if x.ndim != 1 or x.size < TAPS:
        raise TooShort(f"wavedec needs at least {TAPS} samples, got {x.size}")
    if level > max_level(x.size):
        raise LevelTooDeep(
            f"level {level} exceeds the maximum {max_level(x.size)} for {x.size} samples"
        )
    details = []
    approx = x
    for _ in range(level):
        approx, detail = _analysis(approx)
        details.append(detail)
    return WaveletDecomposition(
        approx=approx,
        details=tuple(reversed(details)),
        level=level,
        signal_length=x.size,
    )


def waverec(decomp: WaveletDecomposition) -> np.ndarray:
    schedule = level_schedule(decomp.signal_length, decomp.level)
    if len(decomp.details) != decomp.level:
        raise LengthMismatch(
            f"expected {decomp.level} detail bands, got {len(decomp.details)}"
        )
    expected = schedule[:0:-1]  # deepest first
    actual = [decomp.approx.size] + [d.size for d in decomp.details]
    if actual[0] != expected[0] or actual[1:] != expected:
        raise LengthMismatch(f"coefficient lengths {actual} do not match schedule {schedule}")
    approx = decomp.approx
    for detail, out_len in zip(decomp.details, schedule[-2::-1]):
        approx = idwt_single(approx, detail, out_len)
    return approx


def wavelet_channel_features(signal, level: int = 4) -> np.ndarray:
    """Mean |coef| and mean coef**2 per subband, subbands ordered cA_L, cD_L..cD_1."""
    coeffs = wavedec(signal, level).coefficients()
    out = np.empty(2 * len(coeffs))
    for i, c in enumerate(coeffs):
        out[2 * i] = np.mean(np.abs(c))
        out[2 * i + 1] = np.mean(c * c)
    return out


def wavelet_feature_block(trial, level: int = 4) -> np.ndarray:
    """Per-channel subband statistics, channel-major; 160 values for 16 channels at level 4."""
    samples = np.asarray(getattr(trial, "samples", trial), dtype=float)
    per_channel = 2 * (level + 1)
    out = np.zeros(samples.shape[0] * per_channel)
    for ch, signal in enumerate(samples):
        try:
            out[ch * per_channel:(ch + 1) * per_channel] = wavelet_channel_features(signal, level)
        except (TooShort, LevelTooDeep) as exc:
            warnings.warn(FeatureFailed(f"channel {ch}: {exc}"), stacklevel=2)
    return out
