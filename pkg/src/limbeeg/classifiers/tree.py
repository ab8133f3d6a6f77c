"""Binary CART classifier with Gini impurity."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAIN_TOL = 1e-12


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def best_split(X, y, min_leaf: int = 1):
    """Exhaustive search over features x midpoints between sorted unique values.

    Returns ``(feature, threshold, weighted_child_gini)`` or None when no split
    lowers impurity. Rows with ``x[feature] <= threshold`` go left. Ties prefer
    the lower feature index, then the lower threshold.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n, d = X.shape
    parent = gini(np.bincount(y, minlength=2))
    best = None
    for f in range(d):
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        ones_left = np.cumsum(ys)[:-1]
        n_left = np.arange(1, n)
        # candidate cut after position i only where the value changes
        valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        n_right = n - n_left
        ones_right = ys.sum() - ones_left
        p_l = ones_left / n_left
        p_r = ones_right / n_right
        g_l = 2.0 * p_l * (1.0 - p_l)
        g_r = 2.0 * p_r * (1.0 - p_r)
        weighted = (n_left * g_l + n_right * g_r) / n
        weighted = np.where(valid, weighted, np.inf)
        # first (lowest-threshold) position within tolerance of the minimum
        pos = int(np.flatnonzero(weighted <= weighted.min() + GAIN_TOL)[0])
        score = float(weighted[pos])
        if best is None or score < best[2] - GAIN_TOL:
            best = (f, float((xs[pos] + xs[pos + 1]) / 2.0), score)
    if best is None or parent - best[2] <= GAIN_TOL:
        return None
    return best


@dataclass
class TreeModel:
    max_depth: int | None = None
    min_leaf: int = 1
    # flat node arrays; leaves have feature == -1
    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    proportions: list = field(default_factory=list)   # [p(label 0), p(label 1)]

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if y.size == 0:
            raise ValueError("empty training set")
        self.feature, self.threshold, self.left, self.right, self.proportions = [], [], [], [], []
        self._grow(X, y, 0)
        return self

    def _grow(self, X, y, depth):
        node = len(self.feature)
        counts = np.bincount(y, minlength=2).astype(float)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.proportions.append((counts / counts.sum()).tolist())
        if counts.min() == 0 or (self.max_depth is not None and depth >= self.max_depth) \
                or y.size < 2 * self.min_leaf:
            return node
        split = best_split(X, y, self.min_leaf)
        if split is None:
            return node
        f, thr, _ = split
        mask = X[:, f] <= thr
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self._grow(X[mask], y[mask], depth + 1)
        self.right[node] = self._grow(X[~mask], y[~mask], depth + 1)
        return node

    @property
    def n_splits(self):
        return sum(1 for f in self.feature if f >= 0)

    @property
    def depth(self):
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))
        return walk(0)

    def _leaf(self, row):
        i = 0
        while self.feature[i] >= 0:
            i = self.left[i] if row[self.feature[i]] <= self.threshold[i] else self.right[i]
        return i

    def predict_proba(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.proportions[self._leaf(r)] for r in X])

    def predict(self, X):
        # a 50/50 leaf predicts label 0
        return (self.predict_proba(X)[:, 1] > 0.5).astype(int)

    def to_dict(self):
        return {
            "max_depth": self.max_depth, "min_leaf": self.min_leaf,
            "feature": list(self.feature), "threshold": list(self.threshold),
            "left": list(self.left), "right": list(self.right),
            "proportions": [list(p) for p in self.proportions],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def tree_train(rows, labels, max_depth=None, min_leaf=1) -> TreeModel:
    return TreeModel(max_depth=max_depth, min_leaf=min_leaf).fit(rows, labels)


def tree_predict(model: TreeModel, row) -> int:
    return int(model.predict(np.atleast_2d(row))[0])
