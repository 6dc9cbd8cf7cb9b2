"""Confusion counts and precision / recall / F1 (faulty is the positive class)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(y_true, predicted_faulty) -> ConfusionCounts:
    actual = np.asarray(y_true) > 0
    pred = np.asarray(predicted_faulty, dtype=bool)
    return ConfusionCounts(
        int(np.sum(actual & pred)),
        int(np.sum(~actual & pred)),
        int(np.sum(~actual & ~pred)),
        int(np.sum(actual & ~pred)),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both are 0."""
    return _ratio(2.0 * precision * recall, precision + recall)


def metrics(counts: ConfusionCounts) -> tuple:
    """(precision, recall, f1); every 0/0 is taken as 0."""
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    return precision, recall, f1_score(precision, recall)


def aggregate(fold_counts, mode: str = "pooled") -> tuple:
    """Combine folds: ``pooled`` sums the counts first, ``macro`` averages
    per-fold precision and recall. F1 is the harmonic mean of the pair."""
    fold_counts = list(fold_counts)
    if mode == "pooled":
        return metrics(sum(fold_counts, ConfusionCounts()))
    if mode == "macro":
        per_fold = [metrics(c) for c in fold_counts]
        precision = float(np.mean([m[0] for m in per_fold])) if per_fold else 0.0
        recall = float(np.mean([m[1] for m in per_fold])) if per_fold else 0.0
        return precision, recall, f1_score(precision, recall)
    raise ValueError(f"unknown aggregation mode {mode!r}")
