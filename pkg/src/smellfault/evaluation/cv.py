"""Cross-validation protocol: per-fold preprocessing, parameter selection,
training and pooled scoring for a roster of classifier families."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..learn.families import Family, ThresholdFamily, VotingFamily
from ..learn.pipeline import fold_seeds, prepare_fold
from ..learn.preprocessing import standardize_apply, standardize_fit
from ..learn.search import grid_search
from ..seeding import derive_seed
from .folds import stratified_folds
from .metrics import aggregate, confusion, metrics

MODES = ("nested", "paper")


@dataclass
class EvaluationEntry:
    classifier: str
    params: list
    folds: list
    predictions: np.ndarray
    aggregation: str = "pooled"
    grid_scores: dict = field(default_factory=dict)

    @property
    def pooled(self):
        return sum(self.folds[1:], self.folds[0])

    @property
    def scores(self) -> tuple:
        """(precision, recall, f1) in this entry's aggregation mode."""
        return aggregate(self.folds, self.aggregation)

    def fold_scores(self) -> list:
        return [metrics(c) for c in self.folds]


class Protocol:
    """One outer fold plan over a feature matrix, shared by every classifier.

    ``mode="nested"`` selects parameters inside each outer training fold
    with an inner stratified CV; ``mode="paper"`` selects them once with the
    outer folds and reports that same run. Threshold selections are cached
    so the voting ensembles reuse the per-smell choices.
    """

    def __init__(self, X, y, k: int = 10, seed: int = 0, mode: str = "nested", aggregation: str = "pooled",
                 standardization: str = "fold", inner_k=None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if standardization not in ("fold", "global"):
            raise ValueError(f"unknown standardization {standardization!r}")
        X = np.asarray(X, dtype=np.float64)
        if standardization == "global":
            X = standardize_apply(standardize_fit(X), X)
        self.X = X
        self.y = np.asarray(y)
        self.k = k
        self.seed = seed
        self.mode = mode
        self.aggregation = aggregation
        self.per_fold_standardize = standardization == "fold"
        self.inner_k = inner_k or k
        self.plan = stratified_folds(self.y, k, derive_seed(seed, "folds"))
        self._selected = {}
        self._inner_plans = {}

    # -- parameter selection -------------------------------------------------

    def _inner_plan(self, fold):
        if fold not in self._inner_plans:
            train, _ = self.plan.split(fold)
            self._inner_plans[fold] = stratified_folds(self.y[train], self.inner_k, derive_seed(self.seed, "inner", fold))
        return self._inner_plans[fold]

    def search(self, family: Family, grid, fold=None):
        """Grid search on all data (fold=None) or inside one outer training fold."""
        key = (family.id, tuple(grid), fold)
        if key not in self._selected:
            if fold is None:
                result = grid_search(family, grid, self.X, self.y, self.plan, self.seed, self.aggregation,
                                     self.per_fold_standardize)
            else:
                train, _ = self.plan.split(fold)
                result = grid_search(family, grid, self.X[train], self.y[train], self._inner_plan(fold),
                                     derive_seed(self.seed, "inner-search", fold), self.aggregation,
                                     self.per_fold_standardize)
            self._selected[key] = result
        return self._selected[key]

    def _voting_param(self, family: VotingFamily, fold):
        return tuple(
            self.search(ThresholdFamily(i, family.percents), family.percents, fold).best
            for i in range(family.n_features)
        )

    # -- evaluation ----------------------------------------------------------

    def _run_fixed(self, family: Family, params_per_fold: list) -> tuple:
        predictions = np.zeros(len(self.y), dtype=bool)
        folds = []
        for fold in range(self.k):
            train, test = self.plan.split(fold)
            balance_seed, train_seed = fold_seeds(self.seed, fold)
            Xtr, ytr, Xte = prepare_fold(self.X[train], self.y[train], self.X[test],
                                         standardize=self.per_fold_standardize, balance=family.oversample,
                                         seed=balance_seed)
            model = family.fit(Xtr, ytr, params_per_fold[fold], train_seed)
            pred = model.predict(Xte)
            predictions[test] = pred
            folds.append(confusion(self.y[test], pred))
        return folds, predictions

    def evaluate(self, family: Family, grid=None) -> EvaluationEntry:
        grid = tuple(family.grid if grid is None else grid)
        if isinstance(family, VotingFamily):
            if self.mode == "paper":
                params = [self._voting_param(family, None)] * self.k
            else:
                params = [self._voting_param(family, f) for f in range(self.k)]
            folds, predictions = self._run_fixed(family, params)
            return EvaluationEntry(family.id, params, folds, predictions, self.aggregation)
        if self.mode == "paper" or len(grid) == 1:
            result = self.search(family, grid, None)
            return EvaluationEntry(family.id, [result.best] * self.k, result.fold_counts[result.best],
                                   result.predictions[result.best], self.aggregation, result.scores)
        params = [self.search(family, grid, f).best for f in range(self.k)]
        folds, predictions = self._run_fixed(family, params)
        return EvaluationEntry(family.id, params, folds, predictions, self.aggregation)


def cross_validate(X, y, family: Family, k: int = 10, seed: int = 0, grid=None, **options) -> EvaluationEntry:
    """Evaluate one classifier family; see ``Protocol`` for the options."""
    return Protocol(X, y, k, seed, **options).evaluate(family, grid)


def evaluate_roster(X, y, families, k: int = 10, seed: int = 0, **options) -> list:
    protocol = Protocol(X, y, k, seed, **options)
    return [protocol.evaluate(f) for f in families]
