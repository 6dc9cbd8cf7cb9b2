"""Single-smell threshold baseline and the voting ensembles built from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_PERCENTS = (70, 80, 90)


def nearest_rank(values, percent: float) -> float:
    """Smallest value with at least ``percent`` % of the data at or below it."""
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    if ordered.size == 0:
        raise ValueError("percentile of an empty column")
    rank = max(1, math.ceil(percent / 100.0 * ordered.size))
    return float(ordered[rank - 1])


@dataclass(frozen=True)
class ThresholdClassifier:
    """Flags a formula faulty when one smell's strength exceeds ``cut``."""

    smell: int
    percent: float
    cut: float

    def predict(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64)[:, self.smell] > self.cut


def train_threshold(values, labels=None, percent: float = 70, smell: int = 0) -> ThresholdClassifier:
    """Cut at the nearest-rank ``percent``-th percentile of ``values``.

    Labels are accepted for a uniform training signature; the rule ignores them.
    """
    return ThresholdClassifier(smell, percent, nearest_rank(values, percent))


def vote(predictions, scheme: str) -> bool:
    """Combine one boolean prediction per member."""
    votes = np.asarray(predictions, dtype=bool)
    if scheme == "majority":
        return bool(votes.sum() * 2 > votes.size)
    if scheme == "advocate":
        return bool(votes.any())
    raise ValueError(f"unknown voting scheme {scheme!r}")


@dataclass(frozen=True)
class VotingEnsemble:
    members: tuple
    scheme: str

    def predict(self, X) -> np.ndarray:
        votes = np.column_stack([m.predict(X) for m in self.members])
        if self.scheme == "majority":
            return votes.sum(axis=1) * 2 > len(self.members)
        if self.scheme == "advocate":
            return votes.any(axis=1)
        raise ValueError(f"unknown voting scheme {self.scheme!r}")
