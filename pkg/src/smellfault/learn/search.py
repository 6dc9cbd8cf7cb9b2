"""Grid search by cross-validated F1."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..evaluation.metrics import ConfusionCounts, aggregate, confusion
from .pipeline import fold_seeds, prepare_fold

TIE_TOLERANCE = 1e-12


@dataclass
class GridSearchResult:
    best: object
    scores: dict
    fold_counts: dict = field(default_factory=dict)
    predictions: dict = field(default_factory=dict)


def grid_search(family, grid, X, y, plan, seed: int, aggregation: str = "pooled",
                standardize: bool = True) -> GridSearchResult:
    """Cross-validate every grid point over ``plan`` and keep the best F1.

    Ties (within 1e-12) go to the smallest parameter.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("empty parameter grid")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    counts = {p: [] for p in grid}
    predictions = {p: np.zeros(len(y), dtype=bool) for p in grid}
    for fold in range(plan.k):
        train, test = plan.split(fold)
        balance_seed, train_seed = fold_seeds(seed, fold)
        Xtr, ytr, Xte = prepare_fold(X[train], y[train], X[test], standardize=standardize,
                                     balance=family.oversample, seed=balance_seed)
        for p, model in zip(grid, family.fit_grid(Xtr, ytr, grid, train_seed)):
            pred = model.predict(Xte)
            predictions[p][test] = pred
            counts[p].append(confusion(y[test], pred))
    scores = {p: aggregate(counts[p], aggregation)[2] for p in grid}
    top = max(scores.values())
    best = min(p for p in grid if scores[p] >= top - TIE_TOLERANCE)
    return GridSearchResult(best, scores, counts, predictions)
