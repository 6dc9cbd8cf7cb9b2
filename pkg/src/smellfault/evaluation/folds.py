"""Stratified, shuffled k-fold assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignment: np.ndarray

    def split(self, fold: int) -> tuple:
        """(train indices, test indices) for one fold."""
        return np.flatnonzero(self.assignment != fold), np.flatnonzero(self.assignment == fold)


def stratified_folds(labels, k: int = 10, seed: int = 0) -> FoldPlan:
    """Shuffle each class with a seeded generator and deal it round-robin.

    Faulty examples (label > 0) are dealt first; correct ones continue from
    the next fold, so fold sizes also differ by at most one.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for name, members in (("faulty", np.flatnonzero(labels > 0)), ("correct", np.flatnonzero(labels <= 0))):
        if len(members) < k:
            raise ValueError(f"only {len(members)} {name} examples for {k} folds; lower k")
        shuffled = rng.permutation(members)
        assignment[shuffled] = (offset + np.arange(len(shuffled))) % k
        offset = (offset + len(shuffled)) % k
    return FoldPlan(k, seed, assignment)
