"""Feature standardization and random minority oversampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# population std below this is treated as a constant column
ZERO_VARIANCE = 1e-12


@dataclass(frozen=True)
class StandardizationParams:
    mean: np.ndarray
    scale: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "StandardizationParams":
        return cls(np.asarray(doc["mean"], dtype=np.float64), np.asarray(doc["scale"], dtype=np.float64))


def standardize_fit(X) -> StandardizationParams:
    """Per-column mean and population standard deviation (denominator n).

    Zero-variance columns get a scale of 1, so they map to all zeros.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("standardization needs at least 2 rows")
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > ZERO_VARIANCE, scale, 1.0)
    return StandardizationParams(mean, scale)


def standardize_apply(params: StandardizationParams, X) -> np.ndarray:
    return (np.asarray(X, dtype=np.float64) - params.mean) / params.scale


def oversample(X, y, seed: int) -> tuple:
    """Append copies of randomly drawn minority rows until both classes are equal.

    Original rows keep their order; copies follow, drawn uniformly with
    replacement from the minority class by ``numpy.random.default_rng(seed)``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    pos = np.flatnonzero(y > 0)
    neg = np.flatnonzero(y <= 0)
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("oversampling needs both classes in the training data")
    minority, deficit = (pos, len(neg) - len(pos)) if len(pos) < len(neg) else (neg, len(pos) - len(neg))
    if deficit == 0:
        return X.copy(), y.copy()
    rng = np.random.default_rng(seed)
    picks = minority[rng.integers(0, len(minority), size=deficit)]
    return np.concatenate([X, X[picks]]), np.concatenate([y, y[picks]])
