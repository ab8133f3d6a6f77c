"""Mutual-information MRMR selection and a PCA comparison path."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCovariance, DegenerateFeature, KTooLarge, SingleClassCase

DEFAULT_MI_BINS = 10
# scores closer than this are ties and resolve to the lower feature index
TIE_TOLERANCE = 1e-12


def discretize(x, bins: int = DEFAULT_MI_BINS) -> np.ndarray:
    """Equal-width bin codes over [min, max]; works column-wise on 2-D input."""
    x = np.asarray(x, dtype=float)
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    codes = np.floor((x - lo) / safe * bins).astype(np.intp)
    codes = np.clip(codes, 0, bins - 1)
    return np.where(span > 0, codes, 0)


def _categorical(y):
    _, codes = np.unique(np.asarray(y), return_inverse=True)
    return codes.reshape(-1), int(codes.max()) + 1


def _mi_from_codes(codes, target, n_target):
    """MI in bits between every column of ``codes`` and one categorical ``target``."""
    codes = np.atleast_2d(codes.T).T if codes.ndim == 1 else codes
    n, d = codes.shape
    width = int(codes.max()) + 1 if codes.size else 1
    cells = width * n_target
    flat = (codes * n_target + target[:, None]) + np.arange(d) * cells
    joint = np.bincount(flat.ravel(), minlength=d * cells).reshape(d, width, n_target) / n
    px = joint.sum(axis=2, keepdims=True)
    py = joint.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log2(joint / (px * py)), 0.0)
    return np.maximum(terms.sum(axis=(1, 2)), 0.0)


def mutual_information(feature, labels, bins: int = DEFAULT_MI_BINS) -> float:
    """Plug-in MI (bits) between a binned real feature and categorical labels."""
    x = np.asarray(feature, dtype=float)
    y = np.asarray(labels)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("feature and labels must be equal-length 1-D arrays with >= 2 samples")
    if np.ptp(x) == 0:
        warnings.warn(DegenerateFeature("constant feature: MI is 0"), stacklevel=2)
        return 0.0
    target, n_target = _categorical(y)
    return float(_mi_from_codes(discretize(x, bins)[:, None], target, n_target)[0])


def feature_mutual_information(a, b, bins: int = DEFAULT_MI_BINS) -> float:
    """MI between two real features, both discretized with the same rule."""
    ca = discretize(np.asarray(a, dtype=float), bins)
    cb = discretize(np.asarray(b, dtype=float), bins)
    return float(_mi_from_codes(ca[:, None], cb, bins)[0])


@dataclass
class SelectionResult:
    indices: list
    names: list
    relevance: list       # I(f; c) of each pick
    redundancy: list      # mean I(f; s) against earlier picks
    objective: list       # relevance - redundancy at each step
    method: str = "mrmr"
    set_relevance: float = 0.0    # D(S, c): mean relevance over S
    set_redundancy: float = 0.0   # R(S): mean pairwise MI over S x S
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "method": self.method,
            "indices": [int(i) for i in self.indices],
            "names": list(self.names),
            "steps": [
                {"index": int(i), "relevance": r, "redundancy": q, "objective": o}
                for i, r, q, o in zip(self.indices, self.relevance, self.redundancy, self.objective)
            ],
            "set_relevance": self.set_relevance,
            "set_redundancy": self.set_redundancy,
            **self.extra,
        }


def _argmax_low_index(scores, candidates):
    best = np.max(scores)
    return int(candidates[np.flatnonzero(scores >= best - TIE_TOLERANCE)[0]])


def mrmr_select_matrix(X, y, k: int = 4, bins: int = DEFAULT_MI_BINS, names=None) -> SelectionResult:
    """Greedy MRMR (difference form) on a feature matrix.

    Step one takes the most relevant feature; every later step maximizes
    ``I(f; c) - mean_{s in S} I(f; s)`` over the unselected features.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n, d = X.shape
    if k < 1 or k > d:
        raise KTooLarge(f"k={k} but only {d} features available")
    target, n_target = _categorical(y)
    if n_target < 2:
        raise SingleClassCase("selection needs both labels present")
    codes = discretize(X, bins)
    relevance = _mi_from_codes(codes, target, n_target)
    redundancy_sum = np.zeros(d)
    remaining = np.ones(d, dtype=bool)
    chosen, rel, red, obj = [], [], [], []
    for step in range(k):
        cand = np.flatnonzero(remaining)
        if step == 0:
            score = relevance[cand]
            mean_red = np.zeros(cand.size)
        else:
            mean_red = redundancy_sum[cand] / step
            score = relevance[cand] - mean_red
        pick = _argmax_low_index(score, cand)
        pos = int(np.searchsorted(cand, pick))
        chosen.append(pick)
        rel.append(float(relevance[pick]))
        red.append(float(mean_red[pos]))
        obj.append(float(score[pos]))
        remaining[pick] = False
        if step + 1 < k:
            redundancy_sum += _mi_from_codes(codes, codes[:, pick], bins)
    pair = np.array([_mi_from_codes(codes[:, chosen], codes[:, s], bins) for s in chosen])
    names = list(names) if names is not None else [f"f{i}" for i in range(d)]
    return SelectionResult(
        indices=chosen,
        names=[names[i] for i in chosen],
        relevance=rel,
        redundancy=red,
        objective=obj,
        set_relevance=float(np.mean(rel)),
        set_redundancy=float(pair.sum() / len(chosen) ** 2),
        extra={"mi_bins": bins},
    )


def mrmr_select(table, k: int = 4, bins: int = DEFAULT_MI_BINS) -> SelectionResult:
    return mrmr_select_matrix(table.X, table.y, k, bins, table.feature_names)


def jacobi_eigh(A, tol: float = 1e-14, max_sweeps: int = 60):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` sorted by decreasing eigenvalue;
    eigenvectors are the columns, each signed so its largest entry is positive.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * max(scale, 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * scale:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p], A[:, q] = c * ap - s * aq, s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :], A[q, :] = c * ap - s * aq, s * ap + c * aq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    flip = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(n)])
    return w, V * np.where(flip == 0, 1.0, flip)


@dataclass
class PcaResult:
    components: np.ndarray        # (n_components, n_features), orthonormal rows
    explained_variance: np.ndarray  # all retained-rank eigenvalues, non-increasing
    n_components: int
    mean: np.ndarray
    transformed: np.ndarray

    @property
    def explained_ratio(self):
        return self.explained_variance / self.explained_variance.sum()

    def transform(self, X):
        return (np.asarray(X, dtype=float) - self.mean) @ self.components.T

    def inverse_transform(self, Z):
        return np.asarray(Z) @ self.components + self.mean


def pca_matrix(X, variance_target: float = 0.95, rank_tol: float = 1e-10) -> PcaResult:
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    if n < 2:
        raise DegenerateCovariance("PCA needs at least two rows")
    if not 0.0 < variance_target <= 1.0:
        raise ValueError(f"variance target must be in (0, 1], got {variance_target}")
    mean = X.mean(axis=0)
    Xc = X - mean
    if n - 1 < d:
        # same nonzero spectrum via the smaller Gram matrix
        w, U = jacobi_eigh(Xc @ Xc.T / (n - 1))
        keep = w > rank_tol * max(w[0], 0.0)
        w, U = w[keep], U[:, keep]
        comps = (Xc.T @ U) / np.sqrt((n - 1) * w)
        comps = comps.T
    else:
        w, V = jacobi_eigh(Xc.T @ Xc / (n - 1))
        keep = w > rank_tol * max(w[0], 0.0)
        w, comps = w[keep], V[:, keep].T
    if w.size == 0 or w[0] <= 0:
        raise DegenerateCovariance("covariance has rank 0")
    cum = np.cumsum(w) / w.sum()
    k = int(np.searchsorted(cum, variance_target - 1e-12) + 1)
    k = min(k, w.size)
    comps = comps[:k]
    return PcaResult(comps, w, k, mean, Xc @ comps.T)


def pca_reduce(table, variance_target: float = 0.95):
    """Project a case table onto its leading principal components.

    Returns ``(transformed CaseTable, component count, PcaResult)``.
    """
    res = pca_matrix(table.X, variance_target)
    from .cases import CaseTable
    out = CaseTable(
        table.case_id, table.modality, res.transformed, table.y, list(table.sources),
        [f"pc{i + 1:02d}" for i in range(res.n_components)], dict(table.meta),
    )
    return out, res.n_components, res
