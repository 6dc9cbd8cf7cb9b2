"""Classifier families: a name, a parameter grid and a training routine.

Every family trains on standardized rows with labels in {+1, -1} and
returns a model whose ``predict`` gives True for faulty.
"""

from __future__ import annotations

from .boosting import train_adaboost
from .svm import train_svm_sgd
from .threshold import DEFAULT_PERCENTS, VotingEnsemble, train_threshold

N_FEATURES = 19
DEFAULT_TREE_GRID = (1, 2, 3, 5, 10, 20, 50, 100)
DEFAULT_ALPHA_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
DEFAULT_EPOCHS = 10
DEFAULT_DEPTH = 1


class Family:
    id = "family"
    grid = ()
    # whether training folds are oversampled before fitting
    oversample = True

    def fit(self, X, y, param, seed):
        raise NotImplementedError

    def fit_grid(self, X, y, grid, seed) -> list:
        return [self.fit(X, y, p, seed) for p in grid]


class ThresholdFamily(Family):
    """Cut on one smell column; the parameter is the percentage T."""

    oversample = False

    def __init__(self, smell: int, percents=DEFAULT_PERCENTS):
        self.smell = smell
        self.id = str(smell)
        self.grid = tuple(percents)

    def fit(self, X, y, param, seed):
        return train_threshold(X[:, self.smell], y, param, self.smell)


class VotingFamily(Family):
    """Majority or advocate vote over one threshold classifier per smell.

    The parameter is the tuple of per-smell T values, chosen beforehand by
    each smell's own grid search.
    """

    oversample = False

    def __init__(self, scheme: str, percents=DEFAULT_PERCENTS, n_features: int = N_FEATURES):
        if scheme not in ("majority", "advocate"):
            raise ValueError(f"unknown voting scheme {scheme!r}")
        self.scheme = scheme
        self.id = f"voting-{scheme}"
        self.percents = tuple(percents)
        self.n_features = n_features

    def fit(self, X, y, param, seed):
        members = tuple(train_threshold(X[:, i], y, t, i) for i, t in enumerate(param))
        return VotingEnsemble(members, self.scheme)


class AdaBoostFamily(Family):
    id = "adaboost"

    def __init__(self, trees=DEFAULT_TREE_GRID, max_depth: int = DEFAULT_DEPTH):
        self.grid = tuple(trees)
        self.max_depth = max_depth

    def fit(self, X, y, param, seed):
        return train_adaboost(X, y, int(param), self.max_depth, seed)

    def fit_grid(self, X, y, grid, seed) -> list:
        # a shorter run equals a prefix of the longest one
        full = train_adaboost(X, y, int(max(grid)), self.max_depth, seed)
        return [full.truncated(int(p)) for p in grid]


class SvmFamily(Family):
    id = "svm"

    def __init__(self, alphas=DEFAULT_ALPHA_GRID, epochs: int = DEFAULT_EPOCHS):
        self.grid = tuple(alphas)
        self.epochs = epochs

    def fit(self, X, y, param, seed):
        return train_svm_sgd(X, y, float(param), self.epochs, seed)


ROSTER_IDS = tuple(str(i) for i in range(N_FEATURES)) + ("voting-majority", "voting-advocate", "svm", "adaboost")


def make_family(classifier_id: str, percents=DEFAULT_PERCENTS, trees=DEFAULT_TREE_GRID,
                alphas=DEFAULT_ALPHA_GRID, max_depth=DEFAULT_DEPTH, epochs=DEFAULT_EPOCHS) -> Family:
    if classifier_id.isdigit() and int(classifier_id) < N_FEATURES:
        return ThresholdFamily(int(classifier_id), percents)
    if classifier_id.startswith("voting-"):
        return VotingFamily(classifier_id[len("voting-"):], percents)
    if classifier_id == "adaboost":
        return AdaBoostFamily(trees, max_depth)
    if classifier_id == "svm":
        return SvmFamily(alphas, epochs)
    raise ValueError(f"unknown classifier {classifier_id!r}")
