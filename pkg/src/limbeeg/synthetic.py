"""Synthetic 16-channel trials with a controllable activity signature.

Baseline trials are coloured noise. Activity trials add a Gaussian-enveloped
10 Hz burst on a few channels, which raises alpha-band power and concentrates
the amplitude histogram (lower Shannon entropy) on those channels.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import (
    ACTIVITY_TASKS,
    N_CHANNELS,
    N_SAMPLES,
    SAMPLE_RATE_HZ,
    Modality,
    TaskKind,
    Trial,
    write_trial_csv,
)

_MODALITY_CODE = {Modality.MOTOR: "M", Modality.IMAGERY: "I", Modality.BASELINE: "B"}


@dataclass(frozen=True)
class SyntheticSpec:
    n_subjects: int = 24
    baseline_per_subject: int = 4
    active_channels: tuple = (3, 7, 12)
    alpha_hz: float = 10.0
    alpha_gain: float = 1.5
    noise_uv: float = 10.0
    seed: int = 0


def _coloured_noise(rng, n_channels, n_samples):
    white = rng.normal(size=(n_channels, n_samples))
    # one-pole low-pass gives a 1/f-like low-frequency tilt
    out = np.empty_like(white)
    out[:, 0] = white[:, 0]
    for t in range(1, n_samples):
        out[:, t] = 0.7 * out[:, t - 1] + white[:, t]
    return out / out.std(axis=1, keepdims=True)


def synthetic_trial(rng, subject_id: str, task: TaskKind, modality: Modality,
                    spec: SyntheticSpec = SyntheticSpec()) -> Trial:
    x = spec.noise_uv * _coloured_noise(rng, N_CHANNELS, N_SAMPLES)
    if task is not TaskKind.BEO:
        t = np.arange(N_SAMPLES) / SAMPLE_RATE_HZ
        centre = rng.uniform(1.2, 2.8)
        envelope = np.exp(-0.5 * ((t - centre) / 0.5) ** 2)
        for ch in spec.active_channels:
            phase = rng.uniform(0, 2 * np.pi)
            burst = np.sin(2 * np.pi * spec.alpha_hz * t + phase) * envelope
            x[ch] += spec.alpha_gain * spec.noise_uv * rng.uniform(0.8, 1.2) * burst
    return Trial(subject_id, task, modality, x)


def synthetic_trials(spec: SyntheticSpec = SyntheticSpec()):
    """Per subject: ``baseline_per_subject`` BEO trials plus one trial per task and modality."""
    rng = np.random.default_rng(spec.seed)
    trials = []
    for s in range(1, spec.n_subjects + 1):
        sid = f"S{s:02d}"
        for _ in range(spec.baseline_per_subject):
            trials.append(synthetic_trial(rng, sid, TaskKind.BEO, Modality.BASELINE, spec))
        for modality in (Modality.MOTOR, Modality.IMAGERY):
            for task in ACTIVITY_TASKS:
                trials.append(synthetic_trial(rng, sid, task, modality, spec))
    return trials


def write_synthetic_dataset(root, spec: SyntheticSpec = SyntheticSpec()):
    """Write trials as ``<root>/<subject>/<subject>_<M|I|B>_<task>_<rep>.csv``."""
    root = Path(root)
    reps = {}
    paths = []
    for trial in synthetic_trials(spec):
        key = (trial.subject_id, trial.modality, trial.task)
        reps[key] = reps.get(key, 0) + 1
        name = f"{trial.subject_id}_{_MODALITY_CODE[trial.modality]}_{trial.task.value}_{reps[key]}.csv"
        path = root / trial.subject_id / name
        path.parent.mkdir(parents=True, exist_ok=True)
        write_trial_csv(trial, path)
        paths.append(path)
    return paths
