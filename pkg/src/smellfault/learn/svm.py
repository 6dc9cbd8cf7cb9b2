"""Linear SVM trained by stochastic gradient descent on the hinge loss."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np


class TrainingError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray
    bias: float
    alpha: float

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X) > 0

    def objective(self, X, y) -> float:
        """(alpha/2)*||w||^2 + mean hinge loss."""
        margins = np.asarray(y) * self.decision_function(X)
        return float(0.5 * self.alpha * self.weights @ self.weights + np.maximum(0.0, 1.0 - margins).mean())

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "bias": self.bias, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, doc: dict) -> "SvmModel":
        return cls(np.asarray(doc["weights"], dtype=np.float64), float(doc["bias"]), float(doc["alpha"]))


def step_offset(alpha: float) -> int:
    """Smallest t0 >= 0 with a first step size 1/(alpha*(t0+1)) of at most 1."""
    return max(0, math.ceil(1.0 / alpha) - 1)


@numba.njit(cache=True)
def _sgd_kernel(X, y, alpha, t0, orders, w):
    b = 0.0
    t = 0
    n_features = X.shape[1]
    for epoch in range(orders.shape[0]):
        for k in range(orders.shape[1]):
            i = orders[epoch, k]
            t += 1
            eta = 1.0 / (alpha * (t0 + t))
            score = b
            for j in range(n_features):
                score += w[j] * X[i, j]
            decay = 1.0 - eta * alpha
            for j in range(n_features):
                w[j] *= decay
            if y[i] * score < 1.0:
                for j in range(n_features):
                    w[j] += eta * y[i] * X[i, j]
                b += eta * y[i]
            if not math.isfinite(b) or not math.isfinite(score):
                return b, t
    return b, -1


def train_svm_sgd(X, y, alpha: float, epochs: int = 10, seed: int = 0) -> SvmModel:
    """Minimize (alpha/2)*||w||^2 + mean hinge loss with per-example updates.

    Each epoch visits the examples in an order drawn by
    ``numpy.random.default_rng(seed)``. Step t (1-based, counted across
    epochs) uses eta_t = 1/(alpha*(t0+t)) with t0 from ``step_offset``. The
    bias is updated with the same step but is not regularized.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if epochs < 1:
        raise ValueError("epochs must be at least 1")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    rng = np.random.default_rng(seed)
    orders = np.stack([rng.permutation(X.shape[0]) for _ in range(epochs)]).astype(np.int64)
    w = np.zeros(X.shape[1])
    bias, failed_at = _sgd_kernel(X, y, float(alpha), float(step_offset(alpha)), orders, w)
    if failed_at >= 0 or not np.all(np.isfinite(w)):
        raise TrainingError(
            f"non-finite SGD update at step {failed_at} (alpha={alpha}, epochs={epochs}, "
            f"|w|max={np.nanmax(np.abs(w)) if w.size else 0.0}, bias={bias})"
        )
    return SvmModel(w, float(bias), float(alpha))
