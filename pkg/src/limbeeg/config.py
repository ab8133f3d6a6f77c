"""Pipeline configuration: defaults < key-value config file < command-line flags."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .classifiers import MODEL_NAMES
from .errors import ConfigInvalid
from .features import FeatureConfig
from .ingest import DEFAULT_FILENAME_PATTERN
from .spectral import WelchConfig


@dataclass
class PipelineConfig:
    dataset_root: str | None = None
    output_dir: str = "out"
    filename_pattern: str = DEFAULT_FILENAME_PATTERN
    subset_per_subject: int | None = None
    welch_segment: int = 128
    welch_overlap: float = 0.5
    fft_points: int = 256
    entropy_bins: int = 16
    wavelet_level: int = 4
    mi_bins: int = 10
    selection_k: int = 4
    models: list = field(default_factory=lambda: list(MODEL_NAMES))
    folds: int = 10
    seed: int = 42
    jobs: int = 1

    def validate(self, need_dataset: bool = False) -> "PipelineConfig":
        if need_dataset:
            if not self.dataset_root:
                raise ConfigInvalid("dataset_root is required")
            if not Path(self.dataset_root).is_dir():
                raise ConfigInvalid(f"dataset_root {self.dataset_root} does not exist")
        checks = [
            (self.welch_segment >= 8, "welch_segment must be >= 8"),
            (0.0 <= self.welch_overlap < 1.0, "welch_overlap must be in [0, 1)"),
            (self.fft_points >= self.welch_segment and not self.fft_points & (self.fft_points - 1),
             "fft_points must be a power of two >= welch_segment"),
            (self.entropy_bins >= 2, "entropy_bins must be >= 2"),
            (1 <= self.wavelet_level <= 8, "wavelet_level must be in 1..8"),
            (self.mi_bins >= 2, "mi_bins must be >= 2"),
            (self.selection_k >= 1, "selection_k must be >= 1"),
            (self.folds >= 2, "folds must be >= 2"),
            (self.jobs >= 1, "jobs must be >= 1"),
            (self.subset_per_subject is None or self.subset_per_subject >= 1,
             "subset_per_subject must be >= 1"),
            (all(m in MODEL_NAMES for m in self.models), f"models must be drawn from {MODEL_NAMES}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigInvalid(msg)
        return self

    def feature_config(self) -> FeatureConfig:
        try:
            welch = WelchConfig(self.welch_segment, self.welch_overlap, self.fft_points)
        except ConfigInvalid:
            raise
        return FeatureConfig(welch, self.entropy_bins, self.wavelet_level)

    def config_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_FIELDS = {f.name: f for f in fields(PipelineConfig)}


def _coerce(name, raw: str):
    default = _FIELDS[name].default
    if name == "models":
        return [m.strip() for m in raw.split(",") if m.strip()]
    if name in ("dataset_root", "output_dir", "filename_pattern"):
        return raw
    if name == "subset_per_subject":
        return None if raw.lower() in ("", "none") else int(raw)
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment line. Dashes in keys are allowed."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigInvalid(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise ConfigInvalid(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, value)
        except ValueError:
            raise ConfigInvalid(f"config line {lineno}: bad value {value!r} for {key}") from None
    return out


def load_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigInvalid(f"config file {p} not found")
        values.update(parse_config_text(p.read_text()))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return PipelineConfig(**values)
