"""Soft-margin kernel SVM trained by sequential minimal optimization.

The solver works on the dual

    min  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)

and picks each working pair with second-order information (maximal violating
``i``, then the ``j`` with the largest guaranteed decrease), as in Fan, Chen &
Lin (2005). Training stops once the KKT gap ``m(a) - M(a)`` drops below
``tol``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import NoConvergence

TAU = 1e-12


@dataclass(frozen=True)
class Kernel:
    kind: str = "rbf"        # "rbf" or "poly"
    gamma: float | None = None
    degree: int = 3
    coef0: float = 1.0

    def resolved(self, X) -> "Kernel":
        if self.gamma is not None:
            return self
        # 1 / (n_features * mean per-feature variance)
        var = float(np.mean(np.var(X, axis=0)))
        gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        return Kernel(self.kind, gamma, self.degree, self.coef0)

    def __call__(self, A, B):
        A = np.atleast_2d(A)
        B = np.atleast_2d(B)
        if self.kind == "rbf":
            d2 = np.sum((A[:, None, :] - B[None, :, :]) ** 2, axis=2)
            return np.exp(-self.gamma * d2)
        if self.kind == "poly":
            return (self.gamma * (A @ B.T) + self.coef0) ** self.degree
        raise ValueError(f"unknown kernel {self.kind!r}")


@dataclass
class SvmModel:
    kernel: Kernel
    C: float
    support_vectors: np.ndarray
    dual_coef: np.ndarray        # alpha_i * y_i for the support vectors
    bias: float
    alpha: np.ndarray = field(repr=False, default=None)   # full alpha vector from training
    y_train: np.ndarray = field(repr=False, default=None)
    converged: bool = True
    iterations: int = 0

    def decision_function(self, X):
        K = self.kernel(np.atleast_2d(np.asarray(X, dtype=float)), self.support_vectors)
        return K @ self.dual_coef + self.bias

    def predict_signed(self, X):
        # a decision value of exactly 0 goes to the negative class
        return np.where(self.decision_function(X) > 0, 1, -1)

    def to_dict(self):
        k = self.kernel
        return {
            "kernel": {"kind": k.kind, "gamma": k.gamma, "degree": k.degree, "coef0": k.coef0},
            "C": self.C,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            kernel=Kernel(**d["kernel"]), C=d["C"],
            support_vectors=np.array(d["support_vectors"]).reshape(len(d["dual_coef"]), -1),
            dual_coef=np.array(d["dual_coef"]), bias=d["bias"],
            converged=d["converged"], iterations=d["iterations"],
        )


def _solve_dual(K, y, C, tol, max_iter):
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)           # G = Q alpha - e
    diag = np.diag(K).copy()
    pos = y > 0
    it = 0
    converged = False
    while it < max_iter:
        # I_up: y=+1 below C or y=-1 above 0; I_low: the mirror image
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        minus_yg = -y * grad
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
        g_max = minus_yg[i]
        g_min = np.min(minus_yg[low])
        if g_max - g_min < tol:
            converged = True
            break
        b = g_max - minus_yg
        cand = low & (b > 0)
        quad = diag[i] + diag - 2.0 * K[i]
        quad = np.where(quad > 0, quad, TAU)
        gain = np.where(cand, -(b * b) / quad, np.inf)
        j = int(np.argmin(gain))
        _update_pair(i, j, alpha, grad, K, y, diag, C)
        it += 1
    return alpha, grad, converged, it


def _update_pair(i, j, alpha, grad, K, y, diag, C):
    ai_old, aj_old = alpha[i], alpha[j]
    kij = K[i, j]
    quad = diag[i] + diag[j] - 2.0 * kij
    if quad <= 0:
        quad = TAU
    if y[i] != y[j]:
        delta = (-grad[i] - grad[j]) / quad
        diff = ai_old - aj_old
        ai, aj = ai_old + delta, aj_old + delta
        if diff > 0:
            if aj < 0:
                aj, ai = 0.0, diff
        elif ai < 0:
            ai, aj = 0.0, -diff
        if diff > 0:
            if ai > C:
                ai, aj = C, C - diff
        elif aj > C:
            aj, ai = C, C + diff
    else:
        delta = (grad[i] - grad[j]) / quad
        total = ai_old + aj_old
        ai, aj = ai_old - delta, aj_old + delta
        if total > C:
            if ai > C:
                ai, aj = C, total - C
            elif aj > C:
                aj, ai = C, total - C
        else:
            if aj < 0:
                aj, ai = 0.0, total
            elif ai < 0:
                ai, aj = 0.0, total
    alpha[i], alpha[j] = ai, aj
    # Q_i = y_i * y * K_i
    grad += y * (y[i] * K[i] * (ai - ai_old) + y[j] * K[j] * (aj - aj_old))


def _bias(alpha, grad, y, C):
    yg = y * grad
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        rho = float(np.mean(yg[free]))
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = np.min(yg[ub_mask]) if ub_mask.any() else np.inf
        lb = np.max(yg[lb_mask]) if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2.0)
    return -rho


def svm_train(rows, labels, kernel: Kernel | None = None, C: float = 1.0,
              tol: float = 1e-3, max_passes: int = 1000) -> SvmModel:
    """Train on labels in {-1, +1}; the iteration budget is ``max_passes * n``."""
    X = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    if not set(np.unique(y)) == {-1.0, 1.0}:
        raise ValueError("SVM labels must contain both -1 and +1")
    kernel = (kernel or Kernel()).resolved(X)
    K = kernel(X, X)
    alpha, grad, converged, it = _solve_dual(K, y, C, tol, max_passes * max(len(y), 1))
    if not converged:
        warnings.warn(NoConvergence(f"SMO stopped after {it} iterations"), stacklevel=2)
    alpha = np.clip(alpha, 0.0, C)
    sv = alpha > 0
    return SvmModel(
        kernel=kernel, C=C, support_vectors=X[sv], dual_coef=(alpha * y)[sv],
        bias=_bias(alpha, grad, y, C), alpha=alpha, y_train=y,
        converged=converged, iterations=it,
    )


def svm_predict(model: SvmModel, row):
    """Return ``(label in {-1, +1}, decision value)``."""
    value = float(model.decision_function(np.atleast_2d(row))[0])
    return (1 if value > 0 else -1), value


class SvmClassifier:
    """0/1-label adapter around :func:`svm_train`."""

    def __init__(self, kernel: Kernel | None = None, C: float = 1.0, tol: float = 1e-3,
                 max_passes: int = 1000):
        self.kernel, self.C, self.tol, self.max_passes = kernel or Kernel(), C, tol, max_passes
        self.model: SvmModel | None = None

    def fit(self, X, y):
        signed = np.where(np.asarray(y) == 1, 1.0, -1.0)
        self.model = svm_train(X, signed, self.kernel, self.C, self.tol, self.max_passes)
        return self

    def decision_function(self, X):
        return self.model.decision_function(X)

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self):
        return {"tol": self.tol, "max_passes": self.max_passes, **self.model.to_dict()}

    @classmethod
    def from_dict(cls, d):
        m = SvmModel.from_dict(d)
        out = cls(m.kernel, m.C, d["tol"], d["max_passes"])
        out.model = m
        return out
