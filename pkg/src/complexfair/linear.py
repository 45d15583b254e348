"""Deterministic L2-regularized logistic regression trained by full-batch gradient descent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

LAMBDA = 1e-4
N_ITER = 1000


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    constant_class: int | None = None  # set when the training data held one class

    @property
    def degenerate(self) -> bool:
        return self.constant_class is not None

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.constant_class is not None:
            return np.full(len(X), self.constant_class, dtype=np.int64)
        # sigmoid(score) >= 0.5  <=>  score >= 0
        return (self.decision_function(X) >= 0).astype(np.int64)


def logistic_loss(X, y, weights, bias, lam: float = LAMBDA) -> float:
    """Mean logistic loss plus ``lam/2 * ||weights||^2`` (bias unpenalized)."""
    z = np.asarray(X, dtype=float) @ weights + bias
    sign = 2.0 * np.asarray(y, dtype=float) - 1.0
    per_row = np.logaddexp(0.0, -sign * z)
    return float(per_row.mean() + 0.5 * lam * weights @ weights)


def lipschitz_bound(X, lam: float = LAMBDA) -> float:
    """Gradient Lipschitz constant of the mean logistic loss on ``[X, 1]``."""
    X = np.asarray(X, dtype=float)
    Xb = np.column_stack([X, np.ones(len(X))])
    sigma = np.linalg.norm(Xb, 2)
    return sigma * sigma / (4.0 * len(X)) + lam


def fit_logistic(X, y, lam: float = LAMBDA, n_iter: int = N_ITER) -> LinearModel:
    """Train from zero initialisation with ``n_iter`` steps of size ``1/L``.

    A training set holding a single class yields a constant predictor of
    that class (``LinearModel.degenerate`` is then True).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = X.shape
    classes = np.unique(y)
    if len(classes) < 2:
        return LinearModel(np.zeros(d), 0.0, constant_class=int(classes[0]))
    step = 1.0 / lipschitz_bound(X, lam)
    w = np.zeros(d)
    b = 0.0
    for _ in range(n_iter):
        r = expit(X @ w + b) - y
        gw = X.T @ r / n + lam * w
        gb = r.mean()
        w = w - step * gw
        b = b - step * gb
    return LinearModel(w, float(b))
