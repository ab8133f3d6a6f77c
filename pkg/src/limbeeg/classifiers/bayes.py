"""Gaussian naive Bayes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VAR_FLOOR = 1e-9


@dataclass
class GnbModel:
    classes: np.ndarray = None
    priors: np.ndarray = None
    means: np.ndarray = None       # (n_classes, n_features)
    variances: np.ndarray = None   # floored

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.classes = np.unique(y)
        if self.classes.size < 2:
            raise ValueError("naive Bayes training needs both classes")
        # floor relative to the widest feature so that no class variance is zero
        eps = VAR_FLOOR * float(np.max(np.var(X, axis=0))) or VAR_FLOOR
        self.priors = np.array([np.mean(y == c) for c in self.classes])
        self.means = np.array([X[y == c].mean(axis=0) for c in self.classes])
        self.variances = np.array([X[y == c].var(axis=0) for c in self.classes]) + eps
        return self

    def joint_log_likelihood(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((X.shape[0], self.classes.size))
        for i in range(self.classes.size):
            var = self.variances[i]
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * var)) - 0.5 * np.sum((X - self.means[i]) ** 2 / var, axis=1)
            out[:, i] = np.log(self.priors[i]) + ll
        return out

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(X)
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X):
        # argmax takes the first class on exact ties, i.e. label 0
        return self.classes[np.argmax(self.joint_log_likelihood(X), axis=1)]

    def to_dict(self):
        return {k: getattr(self, k).tolist() for k in ("classes", "priors", "means", "variances")}

    @classmethod
    def from_dict(cls, d):
        return cls(
            classes=np.array(d["classes"], dtype=int), priors=np.array(d["priors"]),
            means=np.array(d["means"]), variances=np.array(d["variances"]),
        )


def gnb_train(rows, labels) -> GnbModel:
    return GnbModel().fit(rows, labels)


def gnb_predict(model: GnbModel, row) -> int:
    return int(model.predict(np.atleast_2d(row))[0])
