"""Discrete two-class AdaBoost over weighted decision trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .tree import DecisionTree, presort, train_tree

# clamp for a perfect round so its learner weight stays finite (alpha ~ 18.4)
MIN_ERROR = 1e-16


@dataclass
class AdaBoostModel:
    trees: list
    alphas: list
    n_estimators: int
    errors: list = field(default_factory=list)

    @property
    def rounds(self) -> list:
        return list(zip(self.trees, self.alphas))

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        score = np.zeros(X.shape[0])
        for tree, alpha in zip(self.trees, self.alphas):
            score += alpha * tree.predict(X)
        return score

    def predict(self, X) -> np.ndarray:
        """True for faulty; a zero score counts as correct."""
        return self.decision_function(X) > 0

    def truncated(self, n: int) -> "AdaBoostModel":
        """The model that training with ``n`` trees would have produced."""
        k = min(n, len(self.trees))
        return AdaBoostModel(self.trees[:k], self.alphas[:k], n, self.errors[:k])

    def error_bound(self) -> float:
        """Product over rounds of 2*sqrt(eps*(1-eps)); bounds the training error.

        A perfect round enters with the clamped error its learner weight was
        computed from, which keeps the product a valid bound.
        """
        clamped = [max(e, MIN_ERROR) for e in self.errors]
        return float(np.prod([2.0 * math.sqrt(e * (1.0 - e)) for e in clamped]))

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "rounds": [
                {"alpha": a, "error": e, "tree": t.to_dict()} for t, a, e in zip(self.trees, self.alphas, self.errors)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AdaBoostModel":
        rounds = doc["rounds"]
        return cls(
            [DecisionTree.from_dict(r["tree"]) for r in rounds],
            [float(r["alpha"]) for r in rounds],
            int(doc["n_estimators"]),
            [float(r["error"]) for r in rounds],
        )


def learner_weight(error: float) -> float:
    error = max(error, MIN_ERROR)
    return 0.5 * math.log((1.0 - error) / error)


def train_adaboost(
    X, y, n_trees: int, max_depth: int = 1, seed: int = 0, criterion: str = "error"
) -> AdaBoostModel:
    """Boost ``n_trees`` weighted trees on labels in {+1, -1}.

    Round t fits a tree on the current weights, with weighted error eps_t
    and alpha_t = 0.5*ln((1-eps_t)/eps_t); weights are multiplied by
    exp(-alpha_t*y*h_t(x)) and renormalized. A round with eps_t = 0 is kept
    and ends training; a round with eps_t >= 0.5 is dropped and ends it.

    Weak learners split on weighted misclassification error by default, so
    the first round is the minimum-error tree. Training is deterministic;
    ``seed`` is accepted so every classifier family shares one signature.
    """
    if n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n = X.shape[0]
    weights = np.full(n, 1.0 / n)
    presorted = presort(X)
    trees, alphas, errors = [], [], []
    for _ in range(n_trees):
        tree = train_tree(X, y, weights, max_depth, criterion, presorted)
        pred = tree.predict(X)
        error = float(weights[pred != y].sum())
        if error >= 0.5:
            break
        alpha = learner_weight(error)
        trees.append(tree)
        alphas.append(alpha)
        errors.append(error)
        if error <= 0.0:
            break
        weights = weights * np.exp(-alpha * y * pred)
        weights /= weights.sum()
    return AdaBoostModel(trees, alphas, n_trees, errors)
