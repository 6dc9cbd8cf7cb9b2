"""Weighted binary decision trees (CART-style, axis-aligned splits)."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

TIE_TOLERANCE = 1e-12


@dataclass
class DecisionTree:
    """Flat tree arrays; ``feature[i] == -1`` marks a leaf with class ``value[i]``.

    A sample goes left when ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: int

    @property
    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0)

    def predict(self, X) -> np.ndarray:
        """Labels in {+1, -1}."""
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        for _ in range(self.max_depth):
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, feat, 0)] <= self.threshold[node]
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)
        return self.value[node]

    def weighted_error(self, X, y, weights) -> float:
        return float(np.sum(np.asarray(weights)[self.predict(X) != np.asarray(y)]))

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "max_depth": self.max_depth,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DecisionTree":
        return cls(
            np.asarray(doc["feature"], dtype=np.int64),
            np.asarray(doc["threshold"], dtype=np.float64),
            np.asarray(doc["left"], dtype=np.int64),
            np.asarray(doc["right"], dtype=np.int64),
            np.asarray(doc["value"], dtype=np.int64),
            int(doc["max_depth"]),
        )


def _impurity(pos, neg, criterion):
    if criterion == "error":
        return np.minimum(pos, neg)
    total = pos + neg
    with np.errstate(invalid="ignore", divide="ignore"):
        gini = total - (pos * pos + neg * neg) / total
    return np.where(total > 0, gini, 0.0)


@numba.njit(cache=True)
def _node_impurity(pos, neg, gini):
    if not gini:
        return min(pos, neg)
    total = pos + neg
    return total - (pos * pos + neg * neg) / total if total > 0 else 0.0


def presort(X) -> tuple:
    """Feature-major ``(order, values)``: per feature, the row order and the sorted values."""
    X = np.asarray(X, dtype=np.float64)
    order = np.argsort(X, axis=0, kind="stable")
    values = np.take_along_axis(X, order, axis=0)
    return np.ascontiguousarray(order.T), np.ascontiguousarray(values.T)


@numba.njit(cache=True)
def _best_split_kernel(order, values, wpos, wneg, total_pos, total_neg, gini, tolerance):
    n_features, m = values.shape
    score = np.empty((n_features, m - 1))
    best = np.inf
    for f in range(n_features):
        left_pos = 0.0
        left_neg = 0.0
        for k in range(m - 1):
            i = order[f, k]
            left_pos += wpos[i]
            left_neg += wneg[i]
            if values[f, k] < values[f, k + 1]:
                right_pos = max(total_pos - left_pos, 0.0)
                right_neg = max(total_neg - left_neg, 0.0)
                s = _node_impurity(left_pos, left_neg, gini) + _node_impurity(right_pos, right_neg, gini)
                best = min(best, s)
            else:
                s = np.inf
            score[f, k] = s
    if not np.isfinite(best):
        return -1, -1, best
    for f in range(n_features):
        for k in range(m - 1):
            if score[f, k] <= best + tolerance:
                return f, k, score[f, k]
    return -1, -1, best


def best_split(X, y, weights, criterion="gini", presorted=None):
    """Lowest-impurity split over midpoints of consecutive distinct values.

    Returns ``(feature, threshold, impurity)`` or None when no split exists.
    Near-ties (within 1e-12) go to the lowest feature, then lowest threshold.
    ``presorted`` may carry ``presort(X)`` to skip the sort.
    """
    if X.shape[0] < 2:
        return None
    order, values = presort(X) if presorted is None else presorted
    y = np.asarray(y)
    wpos = np.where(y > 0, weights, 0.0)
    wneg = np.where(y > 0, 0.0, weights)
    feature, pos, score = _best_split_kernel(order, values, wpos, wneg, wpos.sum(), wneg.sum(),
                                             criterion == "gini", TIE_TOLERANCE)
    if feature < 0:
        return None
    lo, hi = values[feature, pos], values[feature, pos + 1]
    threshold = (lo + hi) / 2.0
    if threshold >= hi:
        threshold = lo
    return int(feature), float(threshold), float(score)


def train_tree(X, y, weights=None, max_depth: int = 1, criterion: str = "gini", presorted=None) -> DecisionTree:
    """Greedy top-down tree on weighted samples with labels in {+1, -1}.

    ``criterion`` is ``"gini"`` (weighted Gini impurity) or ``"error"``
    (weighted misclassification). Growth stops at ``max_depth``, at pure
    nodes, or when no split lowers the impurity. Leaves take the weighted
    majority class, ties going to -1. ``presorted`` may carry ``presort(X)``
    for the root.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n = X.shape[0]
    weights = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=np.float64)
    if criterion not in ("gini", "error"):
        raise ValueError(f"unknown split criterion {criterion!r}")

    feature, threshold, left, right, value = [], [], [], [], []

    def leaf_label(idx):
        wp = weights[idx][y[idx] > 0].sum()
        wn = weights[idx][y[idx] <= 0].sum()
        return 1 if wp > wn else -1

    def grow(idx, depth, node_presorted):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(leaf_label(idx))
        labels = y[idx]
        if depth >= max_depth or np.all(labels > 0) or np.all(labels <= 0):
            return node
        root = idx.shape[0] == n
        Xn, wn = (X, weights) if root else (X[idx], weights[idx])
        split = best_split(Xn, labels, wn, criterion, node_presorted)
        if split is None:
            return node
        parent = float(_impurity(wn[labels > 0].sum(), wn[labels <= 0].sum(), criterion))
        f, t, score = split
        if score >= parent - TIE_TOLERANCE:
            return node
        go_left = Xn[:, f] <= t
        feature[node], threshold[node] = f, t
        left[node] = grow(idx[go_left], depth + 1, None)
        right[node] = grow(idx[~go_left], depth + 1, None)
        return node

    grow(np.arange(n), 0, presorted)
    return DecisionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.int64),
        max_depth,
    )
