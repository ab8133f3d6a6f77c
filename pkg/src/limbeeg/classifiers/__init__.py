"""Classifier families and the name-based model registry used by the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bayes import GnbModel, gnb_predict, gnb_train
from .knn import KnnModel, default_k, knn_fit, knn_predict
from .svm import Kernel, SvmClassifier, SvmModel, svm_predict, svm_train
from .tree import TreeModel, best_split, gini, tree_predict, tree_train

MODEL_SCHEMA = "limbeeg.model/1"
MODEL_NAMES = ("knn-euclid", "knn-mahal", "svm-rbf", "svm-poly3", "svm-poly5", "gnb", "tree")
PARAM_KEYS = ("k", "C", "gamma", "coef0", "tol", "max_passes", "max_depth", "min_leaf")


class Standardizer:
    """Per-feature z-scoring fitted on training rows; constant columns keep scale 1."""

    def fit(self, X):
        X = np.asarray(X, dtype=float)
        self.mean = X.mean(axis=0)
        sd = X.std(axis=0)
        self.scale = np.where(sd > 0, sd, 1.0)
        return self

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d):
        out = cls()
        out.mean, out.scale = np.array(d["mean"]), np.array(d["scale"])
        return out


@dataclass
class ModelSpec:
    name: str = "svm-rbf"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.name!r}; choose from {MODEL_NAMES}")
        unknown = set(self.params) - set(PARAM_KEYS)
        if unknown:
            raise ValueError(f"unknown model parameters {sorted(unknown)}")
        self.params = {k: v for k, v in self.params.items() if v is not None}

    @property
    def standardize(self) -> bool:
        return self.name.startswith(("svm", "knn"))

    def estimator(self):
        p = self.params
        if self.name.startswith("knn"):
            return KnnModel(k=p.get("k"), metric="euclidean" if self.name == "knn-euclid" else "mahalanobis")
        if self.name.startswith("svm"):
            if self.name == "svm-rbf":
                kernel = Kernel("rbf", p.get("gamma"))
            else:
                kernel = Kernel("poly", p.get("gamma"), int(self.name[-1]), p.get("coef0", 1.0))
            return SvmClassifier(kernel, p.get("C", 1.0), p.get("tol", 1e-3), p.get("max_passes", 1000))
        if self.name == "gnb":
            return GnbModel()
        return TreeModel(max_depth=p.get("max_depth"), min_leaf=p.get("min_leaf", 1))

    def build(self) -> "FittedModel":
        return FittedModel(self)

    def as_dict(self):
        return {"name": self.name, "params": dict(sorted(self.params.items()))}


class FittedModel:
    """Estimator plus the (optional) standardizer fitted on the same rows."""

    def __init__(self, spec: ModelSpec, estimator=None, scaler=None):
        self.spec = spec
        self.estimator = estimator
        self.scaler = scaler

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        self.scaler = Standardizer().fit(X) if self.spec.standardize else None
        self.estimator = self.spec.estimator().fit(self._prep(X), np.asarray(y, dtype=int))
        return self

    def _prep(self, X):
        return self.scaler.transform(X) if self.scaler is not None else np.asarray(X, dtype=float)

    def predict(self, X):
        return np.asarray(self.estimator.predict(self._prep(np.atleast_2d(X))), dtype=int)

    def to_dict(self):
        return {
            "schema": MODEL_SCHEMA,
            "spec": self.spec.as_dict(),
            "scaler": None if self.scaler is None else self.scaler.to_dict(),
            "estimator": self.estimator.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema") != MODEL_SCHEMA:
            raise ValueError(f"unsupported model schema {d.get('schema')!r}")
        spec = ModelSpec(d["spec"]["name"], d["spec"]["params"])
        kind = {"knn": KnnModel, "svm": SvmClassifier, "gnb": GnbModel, "tre": TreeModel}[spec.name[:3]]
        scaler = None if d["scaler"] is None else Standardizer.from_dict(d["scaler"])
        return cls(spec, kind.from_dict(d["estimator"]), scaler)


__all__ = [
    "GnbModel", "Kernel", "KnnModel", "MODEL_NAMES", "ModelSpec", "FittedModel", "Standardizer",
    "SvmClassifier", "SvmModel", "TreeModel", "best_split", "default_k", "gini",
    "gnb_predict", "gnb_train", "knn_fit", "knn_predict", "svm_predict", "svm_train",
    "tree_predict", "tree_train",
]
