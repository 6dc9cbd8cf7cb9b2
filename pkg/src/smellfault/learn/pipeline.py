"""Per-fold preprocessing shared by grid search and cross-validation."""

from __future__ import annotations

import numpy as np

from ..seeding import derive_seed
from .preprocessing import oversample, standardize_apply, standardize_fit


def prepare_fold(X_train, y_train, X_test, *, standardize: bool, balance: bool, seed: int):
    """Fit standardization on the training rows, apply it to both sides,
    then oversample the standardized training rows if ``balance``."""
    if standardize:
        params = standardize_fit(X_train)
        X_train = standardize_apply(params, X_train)
        X_test = standardize_apply(params, X_test)
    if balance:
        X_train, y_train = oversample(X_train, y_train, seed)
    return np.asarray(X_train), np.asarray(y_train), np.asarray(X_test)


def fold_seeds(seed: int, fold: int) -> tuple:
    """(oversampling seed, training seed) for one fold."""
    return derive_seed(seed, "oversample", fold), derive_seed(seed, "train", fold)
