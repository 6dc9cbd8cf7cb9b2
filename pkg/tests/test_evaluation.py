import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smellfault.evaluation import ConfusionCounts, aggregate, confusion, metrics, stratified_folds
from smellfault.evaluation.cv import Protocol, cross_validate, evaluate_roster
from smellfault.evaluation.report import (dumps_results, iso_f1_csv, plot_points_csv, results_document,
                                          summary_table)
from smellfault.learn.families import Family, make_family

# --- folds -----------------------------------------------------------------


def labels(n, faulty):
    y = -np.ones(n, dtype=int)
    y[:faulty] = 1
    return y


def test_even_folds():
    plan = stratified_folds(labels(100, 10), 10, seed=0)
    for fold in range(10):
        _, test = plan.split(fold)
        assert len(test) == 10 and (labels(100, 10)[test] > 0).sum() == 1


def test_uneven_folds():
    y = labels(101, 11)
    plan = stratified_folds(y, 10, seed=0)
    sizes = [len(plan.split(f)[1]) for f in range(10)]
    faulty = [(y[plan.split(f)[1]] > 0).sum() for f in range(10)]
    assert set(sizes) <= {10, 11} and set(faulty) <= {1, 2}


def test_folds_are_seeded():
    y = labels(50, 12)
    assert np.array_equal(stratified_folds(y, 5, 3).assignment, stratified_folds(y, 5, 3).assignment)
    assert not np.array_equal(stratified_folds(y, 5, 3).assignment, stratified_folds(y, 5, 4).assignment)


def test_too_few_examples():
    with pytest.raises(ValueError, match="lower k"):
        stratified_folds(labels(100, 3), 10)


# --- metrics ---------------------------------------------------------------


def test_metric_conventions():
    assert metrics(ConfusionCounts(0, 0, 90, 10)) == (0.0, 0.0, 0.0)
    assert metrics(ConfusionCounts()) == (0.0, 0.0, 0.0)
    p, r, f1 = metrics(ConfusionCounts(3, 1, 0, 1))
    assert (p, r) == (0.75, 0.75) and f1 == pytest.approx(0.75)


def test_confusion_counts():
    counts = confusion([1, 1, -1, -1, 1], [True, False, True, False, True])
    assert counts == ConfusionCounts(tp=2, fp=1, tn=1, fn=1)


counts = st.builds(ConfusionCounts, *[st.integers(0, 20)] * 4)


@given(st.lists(counts, min_size=1, max_size=10))
def test_pooled_equals_summed_counts(folds):
    total = sum(folds, ConfusionCounts())
    assert aggregate(folds, "pooled") == metrics(total)
    p, r, f1 = aggregate(folds, "macro")
    assert 0 <= p <= 1 and 0 <= r <= 1 and 0 <= f1 <= 1


def test_unknown_aggregation():
    with pytest.raises(ValueError):
        aggregate([ConfusionCounts()], "weighted")


# --- cross-validation --------------------------------------------------------


class _Constant:
    def __init__(self, value):
        self.value = value

    def predict(self, X):
        return np.full(len(X), self.value)


class ConstantFamily(Family):
    oversample = False

    def __init__(self, value):
        self.id = f"always-{value}"
        self.grid = (0,)
        self.value = value

    def fit(self, X, y, param, seed):
        return _Constant(self.value)


class _FirstColumn:
    def predict(self, X):
        return X[:, 0] > 0


class OracleFamily(Family):
    id = "oracle"
    grid = (0,)

    def fit(self, X, y, param, seed):
        return _FirstColumn()


def dataset(n=200, faulty=20, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.permutation(labels(n, faulty))
    X = rng.integers(0, 6, size=(n, 19)).astype(float)
    X[:, 0] = y
    X[:, 3] += 3 * (y > 0)
    return X, y


def test_constant_correct():
    X, y = dataset()
    assert cross_validate(X, y, ConstantFamily(False), k=5).scores == (0.0, 0.0, 0.0)


def test_constant_faulty():
    X, y = dataset()
    p, r, _ = cross_validate(X, y, ConstantFamily(True), k=5).scores
    assert r == 1.0 and p == pytest.approx(0.1)


@pytest.mark.parametrize("mode", ["nested", "paper"])
def test_oracle(mode):
    X, y = dataset()
    assert cross_validate(X, y, OracleFamily(), k=5, mode=mode).scores == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("classifier", ["3", "voting-advocate", "svm", "adaboost"])
@pytest.mark.parametrize("mode", ["nested", "paper"])
def test_each_example_predicted_once(classifier, mode):
    X, y = dataset(120, 15)
    family = make_family(classifier, trees=(1, 3), alphas=(1e-3, 1e-1))
    entry = cross_validate(X, y, family, k=5, seed=2, mode=mode)
    assert entry.pooled.total == len(y)
    assert len(entry.folds) == len(entry.params) == 5
    assert entry.pooled == confusion(y, entry.predictions)


def test_paper_mode_reports_the_search_run():
    X, y = dataset(120, 15)
    entry = cross_validate(X, y, make_family("adaboost", trees=(1, 2, 5)), k=4, mode="paper")
    assert len(set(entry.params)) == 1
    assert entry.scores[2] == max(entry.grid_scores.values())


def test_roster_is_deterministic():
    X, y = dataset(150, 20, seed=9)
    families = [make_family(c, trees=(1, 3)) for c in ("3", "voting-majority", "adaboost")]
    first = evaluate_roster(X, y, families, k=5, seed=1)
    second = evaluate_roster(X, y, families, k=5, seed=1)
    assert [e.folds for e in first] == [e.folds for e in second]


def test_global_standardization_and_macro_options():
    X, y = dataset(120, 15)
    entry = cross_validate(X, y, make_family("5"), k=4, standardization="global", aggregation="macro")
    assert entry.aggregation == "macro"
    with pytest.raises(ValueError):
        Protocol(X, y, 4, mode="loose")
    with pytest.raises(ValueError):
        Protocol(X, y, 4, standardization="none")


# --- reports ---------------------------------------------------------------


def report_doc():
    X, y = dataset(100, 20)
    entries = evaluate_roster(X, y, [make_family("0"), make_family("3"), ConstantFamily(False)], k=4)
    return results_document(entries, "sha256:abc", 0, "hash")


def test_results_document_shape():
    doc = report_doc()
    assert [e["classifier"] for e in doc["entries"]] == ["0", "3", "always-False"]
    first = doc["entries"][0]
    assert set(first["pooled"]) == {"tp", "fp", "tn", "fn", "p", "r", "f1"}
    assert len(first["folds"]) == 4 and "params" in first["folds"][0]
    assert dumps_results(doc) == dumps_results(report_doc())


def test_empty_report():
    with pytest.raises(ValueError):
        results_document([], "c", 0, "h")


def test_plot_points_keep_the_origin():
    rows = list(csv.reader(io.StringIO(plot_points_csv(report_doc()))))
    assert rows[0] == ["classifier", "precision", "recall", "f1"]
    assert rows[-1] == ["always-False", "0.000000", "0.000000", "0.000000"]


def test_iso_lines_lie_on_their_level():
    rows = list(csv.DictReader(io.StringIO(iso_f1_csv())))
    assert {r["f1"] for r in rows} == {f"{0.1 * i:.2f}" for i in range(1, 10)}
    for row in rows:
        p, r, f = float(row["precision"]), float(row["recall"]), float(row["f1"])
        assert 2 * p * r / (p + r) == pytest.approx(f, abs=1e-5)


def test_summary_table_row():
    doc = {"entries": [{"classifier": "adaboost", "params": [5] * 10,
                        "pooled": {"p": 0.30, "r": 0.71, "f1": 2 * 0.30 * 0.71 / 1.01}}]}
    line = summary_table(doc).splitlines()[2]
    assert line.split() == ["adaboost", "5", "0.30", "0.71", "0.42"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1000))
def test_reported_f1_is_harmonic_mean_of_reported_pair(seed):
    X, y = dataset(80, 16, seed=seed)
    for mode in ("pooled", "macro"):
        entry = cross_validate(X, y, make_family("3"), k=4, seed=seed, aggregation=mode)
        p, r, f1 = entry.scores
        assert f1 == pytest.approx(2 * p * r / (p + r) if p + r else 0.0)
