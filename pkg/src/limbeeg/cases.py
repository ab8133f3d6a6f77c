"""The eleven activity-vs-baseline cases and their CSV persistence."""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidCaseId, SchemaMismatch, SingleClassCase
from .features import FeatureVector, feature_config_from_dict, feature_names
from .ingest import TaskKind
from .storage import atomic_write_text

CASE_ACTIVITIES = {
    1: {"CLH", "CRH", "DLF", "PLF", "DRF", "PRF"},
    2: {"CLH", "CRH"},
    3: {"DLF", "PLF", "DRF", "PRF"},
    4: {"CRH"},
    5: {"CLH"},
    6: {"DRF", "PRF"},
    7: {"DRF"},
    8: {"PRF"},
    9: {"DLF", "PLF"},
    10: {"DLF"},
    11: {"PLF"},
}
CASE_IDS = tuple(CASE_ACTIVITIES)
CASE_MODALITIES = ("motor", "imagery")


class Membership(enum.Enum):
    ACTIVITY = "activity"
    BASELINE = "baseline"
    EXCLUDED = "excluded"


def _value(x):
    return x.value if isinstance(x, enum.Enum) else str(x)


def case_membership(case_id: int, task, modality=None) -> Membership:
    if case_id not in CASE_ACTIVITIES:
        raise InvalidCaseId(f"case id must be 1-11, got {case_id!r}")
    task = _value(task).upper()
    TaskKind(task)
    if task == "BEO":
        return Membership.BASELINE
    if modality is not None and _value(modality) == "baseline":
        return Membership.EXCLUDED
    return Membership.ACTIVITY if task in CASE_ACTIVITIES[case_id] else Membership.EXCLUDED


@dataclass
class CaseTable:
    case_id: int
    modality: str
    X: np.ndarray
    y: np.ndarray
    sources: list
    feature_names: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.size:
            raise SchemaMismatch(f"X {self.X.shape} and y {self.y.shape} disagree")
        if self.X.shape[1] != len(self.feature_names):
            raise SchemaMismatch(
                f"{self.X.shape[1]} feature columns, {len(self.feature_names)} names"
            )

    @property
    def n_rows(self):
        return self.y.size

    @property
    def name(self):
        return f"case{self.case_id:02d}_{self.modality}"

    def subset(self, rows=None, columns=None) -> "CaseTable":
        rows = np.arange(self.n_rows) if rows is None else np.asarray(rows)
        columns = np.arange(self.X.shape[1]) if columns is None else np.asarray(columns)
        return CaseTable(
            self.case_id, self.modality, self.X[np.ix_(rows, columns)], self.y[rows],
            [self.sources[i] for i in rows], [self.feature_names[j] for j in columns],
            dict(self.meta),
        )

    def equals(self, other: "CaseTable") -> bool:
        return (
            self.case_id == other.case_id
            and self.modality == other.modality
            and self.feature_names == other.feature_names
            and self.sources == other.sources
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.X, other.X)
        )


def build_case(features, case_id: int, modality: str, names=None, meta=None) -> CaseTable:
    """Label activity rows of ``modality`` 1 and baseline rows 0; drop everything else."""
    features = list(features)
    if not features:
        raise ValueError("no feature vectors given")
    if modality not in CASE_MODALITIES:
        raise ValueError(f"modality must be one of {CASE_MODALITIES}, got {modality!r}")
    rows = []
    for fv in features:
        m = case_membership(case_id, fv.task, fv.modality)
        if m is Membership.BASELINE:
            rows.append((fv, 0))
        elif m is Membership.ACTIVITY and fv.modality == modality:
            rows.append((fv, 1))
    rows.sort(key=lambda r: (r[0].subject_id, r[0].task))
    labels = {label for _, label in rows}
    if labels != {0, 1}:
        raise SingleClassCase(
            f"case {case_id} ({modality}) has only label(s) {sorted(labels)}"
        )
    n_feat = rows[0][0].values.size
    names = list(names) if names is not None else feature_names()
    return CaseTable(
        case_id, modality,
        np.vstack([fv.values for fv, _ in rows]).reshape(len(rows), n_feat),
        np.array([label for _, label in rows]),
        [fv.source_tag for fv, _ in rows],
        names,
        dict(meta or {}),
    )


def build_all_cases(features, names=None, meta=None):
    features = list(features)
    return [
        build_case(features, cid, mod, names, meta)
        for cid in CASE_IDS for mod in CASE_MODALITIES
    ]


def _fmt(v: float) -> str:
    return repr(float(v))


def _meta_line(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n"


def _split_meta(text: str):
    meta = {}
    body = []
    for line in text.splitlines(keepends=True):
        if line.startswith("#") and not body:
            meta.update(json.loads(line[1:].strip()))
        else:
            body.append(line)
    return meta, "".join(body)


def case_csv_text(table: CaseTable) -> str:
    meta = dict(table.meta)
    meta.update(case_id=table.case_id, modality=table.modality, sources=table.sources)
    buf = io.StringIO()
    buf.write(_meta_line(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.feature_names + ["label"])
    for row, label in zip(table.X, table.y):
        w.writerow([_fmt(v) for v in row] + [int(label)])
    return buf.getvalue()


def write_case_csv(table: CaseTable, path) -> Path:
    return atomic_write_text(path, case_csv_text(table))


def read_case_csv(path, expected_names=None) -> CaseTable:
    """Read a case file.

    ``expected_names`` defaults to the names implied by the embedded feature
    configuration, or the 416 canonical names when none is embedded.
    """
    meta, body = _split_meta(Path(path).read_text())
    reader = csv.reader(io.StringIO(body))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatch(f"{path}: empty case file") from None
    if expected_names is not None:
        expected = list(expected_names)
    elif "feature_config" in meta:
        expected = feature_names(feature_config_from_dict(meta["feature_config"]))
    else:
        expected = feature_names()
    if header != expected + ["label"]:
        raise SchemaMismatch(
            f"{path}: header has {len(header) - 1} feature columns, expected {len(expected)}"
        )
    X, y = [], []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise SchemaMismatch(f"{path}: line {lineno} has {len(row)} cells")
        X.append([float(v) for v in row[:-1]])
        y.append(int(row[-1]))
    sources = meta.pop("sources", [""] * len(y))
    case_id = int(meta.pop("case_id", 0))
    modality = meta.pop("modality", "")
    return CaseTable(case_id, modality, np.array(X).reshape(len(y), len(expected)),
                     np.array(y, dtype=int), list(sources), expected, meta)


def features_csv_text(vectors, names, meta=None) -> str:
    """Feature table: one row per trial, 416 features plus a ``label`` source tag."""
    buf = io.StringIO()
    buf.write(_meta_line(dict(meta or {})))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(names) + ["label"])
    for fv in vectors:
        w.writerow([_fmt(v) for v in fv.values] + [fv.source_tag])
    return buf.getvalue()


def write_features_csv(vectors, path, names=None, meta=None) -> Path:
    return atomic_write_text(path, features_csv_text(vectors, names or feature_names(), meta))


def read_features_csv(path):
    """Return ``(vectors, names, meta)``."""
    meta, body = _split_meta(Path(path).read_text())
    reader = csv.reader(io.StringIO(body))
    header = next(reader, None)
    if not header or header[-1] != "label":
        raise SchemaMismatch(f"{path}: missing label column")
    names = header[:-1]
    vectors = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise SchemaMismatch(f"{path}: line {lineno} has {len(row)} cells")
        vectors.append(FeatureVector.from_tag([float(v) for v in row[:-1]], row[-1]))
    return vectors, names, meta
