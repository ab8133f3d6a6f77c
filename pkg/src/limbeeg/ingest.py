"""Trial CSV ingestion, label parsing and per-channel normalization."""
from __future__ import annotations

import csv
import enum
import re
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    AllZeroChannel,
    EmptyDataset,
    MalformedHeader,
    NonNumericCell,
    RowCountMismatch,
    UnlabeledFile,
    UnlabeledTrial,
)

N_CHANNELS = 16
N_SAMPLES = 500
SAMPLE_RATE_HZ = 125.0


class TaskKind(str, enum.Enum):
    BEO = "BEO"
    CLH = "CLH"
    CRH = "CRH"
    DLF = "DLF"
    PLF = "PLF"
    DRF = "DRF"
    PRF = "PRF"


class Modality(str, enum.Enum):
    MOTOR = "motor"
    IMAGERY = "imagery"
    BASELINE = "baseline"


ACTIVITY_TASKS = tuple(t for t in TaskKind if t is not TaskKind.BEO)

_MODALITY_CODES = {
    "m": Modality.MOTOR, "motor": Modality.MOTOR, "ma": Modality.MOTOR,
    "i": Modality.IMAGERY, "imagery": Modality.IMAGERY, "mi": Modality.IMAGERY,
    "b": Modality.BASELINE, "baseline": Modality.BASELINE, "rest": Modality.BASELINE,
}

# <subject>_<modality>_<task>[_<repetition>].csv, e.g. S01_M_CLH_2.csv
DEFAULT_FILENAME_PATTERN = (
    r"(?P<subject>S\d+)_(?P<modality>[A-Za-z]+)_(?P<task>[A-Z]{3})(?:_\d+)?\.csv$"
)


def parse_modality(code: str) -> Modality:
    try:
        return _MODALITY_CODES[code.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown modality code {code!r}") from None


@dataclass(frozen=True, eq=False)
class Trial:
    subject_id: str
    task: TaskKind
    modality: Modality
    samples: np.ndarray  # (16, 500), microvolts
    sample_rate_hz: float = SAMPLE_RATE_HZ
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (N_CHANNELS, N_SAMPLES):
            raise ValueError(f"trial must be {N_CHANNELS}x{N_SAMPLES}, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("trial contains non-finite samples")
        if (self.task is TaskKind.BEO) != (self.modality is Modality.BASELINE):
            raise ValueError(f"task {self.task.value} is incompatible with {self.modality.value}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __eq__(self, other):
        if not isinstance(other, Trial):
            return NotImplemented
        return (
            (self.subject_id, self.task, self.modality, self.sample_rate_hz)
            == (other.subject_id, other.task, other.modality, other.sample_rate_hz)
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None


_ELECTRODE_RE = re.compile(r"^\s*(?:ch|channel|electrode|eeg)?[ _]?(\d{1,2})\s*$", re.I)


def _electrode_columns(header):
    """Map electrode index -> column position; everything else is ignored."""
    found = {}
    for pos, name in enumerate(header):
        m = _ELECTRODE_RE.match(name)
        if m and int(m.group(1)) < N_CHANNELS and int(m.group(1)) not in found:
            found[int(m.group(1))] = pos
    if sorted(found) != list(range(N_CHANNELS)) or len(header) not in (N_CHANNELS, N_CHANNELS + 1):
        return None
    return found


def read_trial_matrix(path) -> np.ndarray:
    """Read a trial CSV into a (16, 500) array ordered by electrode index."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedHeader(f"{path}: empty file")
    header = rows[0]
    cols = _electrode_columns(header)
    if cols is None:
        raise MalformedHeader(f"{path}: header {header!r} lacks electrode columns 0-15")
    data = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if len(data) != N_SAMPLES:
        raise RowCountMismatch(f"{path}: expected {N_SAMPLES} data rows, found {len(data)}")
    out = np.empty((N_CHANNELS, N_SAMPLES))
    for i, row in enumerate(data):
        if len(row) != len(header):
            raise MalformedHeader(f"{path}: row {i + 2} has {len(row)} cells, header has {len(header)}")
        for ch, pos in cols.items():
            cell = row[pos]
            try:
                value = float(cell)
            except ValueError:
                raise NonNumericCell(path, i + 2, pos + 1, cell) from None
            if not np.isfinite(value):
                raise NonNumericCell(path, i + 2, pos + 1, cell)
            out[ch, i] = value
    return out


def parse_trial_csv(path, subject_id=None, task=None, modality=None,
                    pattern: str = DEFAULT_FILENAME_PATTERN) -> Trial:
    """Parse one trial file; missing labels are taken from the file name."""
    samples = read_trial_matrix(path)
    if subject_id is None or task is None or modality is None:
        label = label_from_path(path, pattern)
        if label is None:
            raise UnlabeledTrial(f"{path}: file name does not encode task/modality")
        subject_id = subject_id or label[0]
        task = task or label[1]
        modality = modality or label[2]
    return Trial(subject_id, TaskKind(task), Modality(modality), samples)


def write_trial_csv(trial: Trial, path) -> None:
    """Write in the acquisition layout: a sample-index column then electrodes 0-15."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Sample"] + [str(c) for c in range(N_CHANNELS)])
        for i in range(trial.samples.shape[1]):
            w.writerow([i] + [repr(float(v)) for v in trial.samples[:, i]])


def normalize_channels(trial: Trial) -> Trial:
    """Divide every channel by its maximum absolute value.

    All-zero channels are left as they are and recorded in ``Trial.warnings``.
    """
    peak = np.max(np.abs(trial.samples), axis=1)
    notes = []
    scale = peak.copy()
    for ch in np.flatnonzero(peak == 0):
        msg = f"channel {ch} is all zero; left unnormalized"
        notes.append(msg)
        warnings.warn(AllZeroChannel(msg), stacklevel=2)
        scale[ch] = 1.0
    return replace(
        trial,
        samples=trial.samples / scale[:, None],
        warnings=trial.warnings + tuple(notes),
    )


def label_from_path(path, pattern: str = DEFAULT_FILENAME_PATTERN):
    """Return ``(subject, TaskKind, Modality)`` or None if the name does not match."""
    m = re.search(pattern, Path(path).as_posix())
    if not m:
        return None
    groups = m.groupdict()
    try:
        task = TaskKind(groups["task"].upper())
    except (KeyError, ValueError):
        return None
    if groups.get("modality"):
        try:
            modality = parse_modality(groups["modality"])
        except ValueError:
            return None
    else:
        modality = Modality.BASELINE if task is TaskKind.BEO else None
    if modality is None or (task is TaskKind.BEO) != (modality is Modality.BASELINE):
        return None
    subject = groups.get("subject") or Path(path).parent.name
    return subject, task, modality


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    subject_id: str
    task: TaskKind
    modality: Modality


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    skipped: tuple = ()

    @property
    def counts(self):
        return dict(sorted(
            Counter((e.task.value, e.modality.value) for e in self.entries).items()
        ))

    def __len__(self):
        return len(self.entries)


def _round_robin_subset(entries, n):
    groups = defaultdict(list)
    for e in entries:
        groups[(e.modality.value, e.task.value)].append(e)
    keys = sorted(groups)
    picked = []
    depth = 0
    while len(picked) < n and any(depth < len(groups[k]) for k in keys):
        for k in keys:
            if depth < len(groups[k]) and len(picked) < n:
                picked.append(groups[k][depth])
        depth += 1
    return sorted(picked, key=lambda e: e.path)


def scan_dataset(root, pattern: str = DEFAULT_FILENAME_PATTERN,
                 subset_per_subject: int | None = None) -> DatasetManifest:
    """Collect labeled trial files under ``root``, sorted by relative path.

    ``subset_per_subject`` keeps at most N files per subject, taken round-robin
    over the (modality, task) groups so every label stays represented.
    """
    root = Path(root)
    if not root.is_dir():
        raise EmptyDataset(f"{root} is not a directory")
    entries, skipped = [], []
    for p in sorted(root.rglob("*.csv"), key=lambda q: q.relative_to(root).as_posix()):
        rel = p.relative_to(root).as_posix()
        label = label_from_path(rel, pattern)
        if label is None:
            skipped.append(rel)
            warnings.warn(UnlabeledFile(f"{rel}: cannot derive task/modality"), stacklevel=2)
            continue
        entries.append(ManifestEntry(rel, *label))
    if not entries:
        raise EmptyDataset(f"no labeled trial files under {root}")
    if subset_per_subject is not None:
        by_subject = defaultdict(list)
        for e in entries:
            by_subject[e.subject_id].append(e)
        entries = sorted(
            (e for s in sorted(by_subject) for e in _round_robin_subset(by_subject[s], subset_per_subject)),
            key=lambda e: e.path,
        )
    return DatasetManifest(tuple(entries), tuple(skipped))


def load_trial(root, entry: ManifestEntry) -> Trial:
    samples = read_trial_matrix(Path(root) / entry.path)
    return Trial(entry.subject_id, entry.task, entry.modality, samples)
