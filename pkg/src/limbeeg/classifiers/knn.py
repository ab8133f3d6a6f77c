"""k-nearest-neighbour voting with Euclidean or ridge-regularized Mahalanobis distance."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import SingularCovariance


def default_k(n_train: int) -> int:
    """Neighbour count round(sqrt(n / 2)), clamped to [1, n - 1]."""
    if n_train < 2:
        raise ValueError(f"need at least 2 training rows, got {n_train}")
    k = int(math.floor(math.sqrt(n_train / 2.0) + 0.5))
    return min(max(k, 1), n_train - 1)


def _whitening(cov, ridge_scale: float = 1e-6, escalations: int = 3):
    """Inverse Cholesky factor of ``cov + lam * I``; lam grows x10 on failure."""
    d = cov.shape[0]
    lam = ridge_scale * float(np.trace(cov)) / d
    if lam <= 0:
        lam = ridge_scale
    for _ in range(escalations + 1):
        reg = cov + lam * np.eye(d)
        try:
            L = np.linalg.cholesky(reg)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        if np.all(np.isfinite(L)) and np.min(np.diag(L)) > 0:
            return np.linalg.inv(L), lam
        lam *= 10.0
    raise SingularCovariance(f"covariance not positive definite even with ridge {lam / 10:.3g}")


@dataclass
class KnnModel:
    k: int | None = None
    metric: str = "euclidean"   # or "mahalanobis"
    X: np.ndarray = None
    y: np.ndarray = None
    whitener: np.ndarray = None
    ridge: float = 0.0

    def fit(self, X, y, covariance=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if len(np.unique(y)) < 2:
            raise ValueError("KNN training needs both classes")
        k = self.k if self.k is not None else default_k(len(y))
        if not 1 <= k <= len(y):
            raise ValueError(f"k={k} invalid for {len(y)} training rows")
        self.k = k
        if self.metric == "mahalanobis":
            cov = np.cov(X, rowvar=False).reshape(X.shape[1], X.shape[1]) if covariance is None \
                else np.asarray(covariance, dtype=float)
            self.whitener, self.ridge = _whitening(cov)
        elif self.metric != "euclidean":
            raise ValueError(f"unknown metric {self.metric!r}")
        self.X, self.y = X, y
        return self

    def _embed(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.whitener.T if self.whitener is not None else X

    def predict(self, X):
        Q = np.atleast_2d(self._embed(X))
        T = self._embed(self.X)
        # direct differences so that equidistant rows compare exactly equal
        d2 = np.sum((Q[:, None, :] - T[None, :, :]) ** 2, axis=2)
        # stable sort keeps the lower training index first on equal distances
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        votes = self.y[nearest].sum(axis=1)
        # ties go to label 0
        return (2 * votes > self.k).astype(int)

    def to_dict(self):
        return {
            "k": self.k, "metric": self.metric, "X": self.X.tolist(), "y": self.y.tolist(),
            "whitener": None if self.whitener is None else self.whitener.tolist(),
            "ridge": self.ridge,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            k=d["k"], metric=d["metric"], X=np.array(d["X"]), y=np.array(d["y"], dtype=int),
            whitener=None if d["whitener"] is None else np.array(d["whitener"]),
            ridge=d["ridge"],
        )


def knn_fit(rows, labels, k=None, metric="euclidean", covariance=None) -> KnnModel:
    return KnnModel(k=k, metric=metric).fit(rows, labels, covariance=covariance)


def knn_predict(model: KnnModel, row) -> int:
    return int(model.predict(np.atleast_2d(row))[0])
