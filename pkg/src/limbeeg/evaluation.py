"""Stratified k-fold cross-validation and confusion-matrix metrics."""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ModelSpec
from .errors import EmptyMatrix, FoldsReduced, TooFewSamples
from .selection import DEFAULT_MI_BINS, mrmr_select_matrix

REPORT_SCHEMA = "limbeeg.report/1"
DEFAULT_SEED = 42


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @classmethod
    def from_predictions(cls, truth, pred):
        t = np.asarray(truth, dtype=int)
        p = np.asarray(pred, dtype=int)
        return cls(
            int(np.sum((t == 1) & (p == 1))), int(np.sum((t == 0) & (p == 1))),
            int(np.sum((t == 1) & (p == 0))), int(np.sum((t == 0) & (p == 0))),
        )

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other):
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)

    def swapped(self):
        """Same matrix with the class roles exchanged."""
        return ConfusionMatrix(self.tn, self.fn, self.fp, self.tp)

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def _ratio(a, b):
    return a / b if b else 0.0


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class: dict = field(default_factory=dict)

    def as_dict(self):
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "per_class": self.per_class}


def metrics_from_confusion(cm: ConfusionMatrix) -> Metrics:
    """Accuracy plus macro (two-class, unweighted) precision, recall and F1.

    Undefined ratios (0/0) count as 0.
    """
    if cm.total <= 0:
        raise EmptyMatrix("confusion matrix is empty")
    per_class = {}
    for label, (tp, fp, fn) in {1: (cm.tp, cm.fp, cm.fn), 0: (cm.tn, cm.fn, cm.fp)}.items():
        p = _ratio(tp, tp + fp)
        r = _ratio(tp, tp + fn)
        per_class[label] = {"precision": p, "recall": r, "f1": _ratio(2 * p * r, p + r)}
    return Metrics(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=(per_class[0]["precision"] + per_class[1]["precision"]) / 2,
        recall=(per_class[0]["recall"] + per_class[1]["recall"]) / 2,
        f1=(per_class[0]["f1"] + per_class[1]["f1"]) / 2,
        per_class=per_class,
    )


def stratified_kfold(labels, k: int = 10, seed: int = DEFAULT_SEED):
    """Return ``k`` disjoint index arrays covering every row.

    Rows are shuffled within each class, laid out class by class and dealt to
    folds round-robin, so each fold receives floor or ceil of ``n_c / k`` rows
    of every class and fold sizes differ by at most one. ``k`` shrinks to the
    minority-class count when that is smaller (with a warning).
    """
    y = np.asarray(labels)
    classes, counts = np.unique(y, return_counts=True)
    if classes.size < 2 or counts.min() < 2:
        raise TooFewSamples(f"need >= 2 rows in each of two classes, got {dict(zip(classes.tolist(), counts.tolist()))}")
    if counts.min() < k:
        warnings.warn(FoldsReduced(f"folds reduced from {k} to {int(counts.min())}"), stacklevel=2)
        k = int(counts.min())
    rng = np.random.default_rng(seed)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in classes])
    assignment = np.empty(y.size, dtype=int)
    assignment[order] = np.arange(y.size) % k
    return [np.flatnonzero(assignment == f) for f in range(k)]


def fold_hash(folds) -> str:
    blob = json.dumps([f.tolist() for f in folds]).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SelectionSpec:
    method: str = "mrmr"      # "mrmr" or "none"
    k: int = 4
    bins: int = DEFAULT_MI_BINS
    global_selection: bool = False

    def select(self, X, y):
        if self.method == "none":
            return list(range(X.shape[1]))
        if self.method != "mrmr":
            raise ValueError(f"unsupported selection method {self.method!r}")
        return mrmr_select_matrix(X, y, min(self.k, X.shape[1]), self.bins).indices

    def as_dict(self):
        return {"method": self.method, "k": self.k, "bins": self.bins,
                "global_selection": self.global_selection}


@dataclass
class FoldResult:
    fold: int
    train_index: np.ndarray
    test_index: np.ndarray
    selected: list
    train_accuracy: float
    test_accuracy: float
    confusion: ConfusionMatrix

    def as_dict(self):
        return {
            "fold": self.fold,
            "train_index": self.train_index.tolist(),
            "test_index": self.test_index.tolist(),
            "selected": [int(i) for i in self.selected],
            "train_accuracy": self.train_accuracy,
            "test_accuracy": self.test_accuracy,
            "confusion": self.confusion.as_dict(),
        }


@dataclass
class EvalReport:
    case_id: int
    modality: str
    model: dict
    selection: dict
    folds: list
    seed: int
    fold_assignment_hash: str
    feature_config_hash: str = ""
    feature_names: list = field(default_factory=list)

    @property
    def confusion(self) -> ConfusionMatrix:
        total = ConfusionMatrix()
        for f in self.folds:
            total = total + f.confusion
        return total

    @property
    def mean_train_accuracy(self):
        return float(np.mean([f.train_accuracy for f in self.folds]))

    @property
    def mean_test_accuracy(self):
        return float(np.mean([f.test_accuracy for f in self.folds]))

    @property
    def metrics(self) -> Metrics:
        return metrics_from_confusion(self.confusion)

    def summary(self):
        m = self.metrics
        return {
            "train_accuracy": self.mean_train_accuracy,
            "test_accuracy": self.mean_test_accuracy,
            "precision": m.precision,
            "recall": m.recall,
            "f1": m.f1,
        }

    def as_dict(self):
        return {
            "schema": REPORT_SCHEMA,
            "case_id": self.case_id,
            "modality": self.modality,
            "model": self.model,
            "selection": self.selection,
            "seed": self.seed,
            "fold_assignment_hash": self.fold_assignment_hash,
            "feature_config_hash": self.feature_config_hash,
            "summary": self.summary(),
            "confusion": self.confusion.as_dict(),
            "per_class": {str(k): v for k, v in self.metrics.per_class.items()},
            "selected_names": [
                [self.feature_names[i] for i in f.selected] if self.feature_names else []
                for f in self.folds
            ],
            "folds": [f.as_dict() for f in self.folds],
        }


def cross_validate(table, model: ModelSpec | None = None, selection: SelectionSpec | None = None,
                   k: int = 10, seed: int = DEFAULT_SEED) -> EvalReport:
    """Stratified k-fold CV with selection and scaling fitted on the training folds only.

    With ``selection.global_selection`` the features are chosen once on all
    rows instead (this leaks label information and exists for comparison).
    """
    model = model or ModelSpec()
    selection = selection or SelectionSpec()
    X, y = table.X, table.y
    folds = stratified_kfold(y, k, seed)
    global_cols = selection.select(X, y) if selection.global_selection else None
    results = []
    all_index = np.arange(y.size)
    for i, test in enumerate(folds):
        train = np.setdiff1d(all_index, test)
        cols = global_cols if global_cols is not None else selection.select(X[train], y[train])
        Xtr, Xte = X[np.ix_(train, cols)], X[np.ix_(test, cols)]
        fitted = model.build().fit(Xtr, y[train])
        pred_train = fitted.predict(Xtr)
        pred_test = fitted.predict(Xte)
        results.append(FoldResult(
            fold=i, train_index=train, test_index=test, selected=list(cols),
            train_accuracy=float(np.mean(pred_train == y[train])),
            test_accuracy=float(np.mean(pred_test == y[test])),
            confusion=ConfusionMatrix.from_predictions(y[test], pred_test),
        ))
    return EvalReport(
        case_id=table.case_id, modality=table.modality, model=model.as_dict(),
        selection=selection.as_dict(), folds=results, seed=seed,
        fold_assignment_hash=fold_hash(folds),
        feature_config_hash=str(table.meta.get("feature_config_hash", "")),
        feature_names=list(table.feature_names),
    )
