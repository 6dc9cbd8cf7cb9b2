import numpy as np
import pytest

from smellfault.corpus import corpus_summary, load_corpus
from smellfault.smells import build_feature_matrix
from smellfault.synth import SynthConfig, generate, write_corpus


def correlations(matrix):
    faulty = (matrix.y > 0).astype(float)
    out = np.zeros(matrix.X.shape[1])
    for j, column in enumerate(matrix.X.T):
        if column.std() > 0:
            out[j] = np.corrcoef(column, faulty)[0, 1]
    return out


@pytest.fixture(scope="module")
def default_matrix():
    return build_feature_matrix(generate(SynthConfig(formulas=2000, seed=1)).corpus)


def test_every_smell_varies(default_matrix):
    assert (default_matrix.X.std(axis=0) > 0).all()


def test_fault_rate_is_close_to_configured(default_matrix):
    assert len(default_matrix) == 2000
    assert abs((default_matrix.y > 0).mean() - 0.03) <= 0.005


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_uniform_planting_is_uncorrelated(seed):
    m = build_feature_matrix(generate(SynthConfig(formulas=2000, signal_strength=0.0, seed=seed)).corpus)
    assert np.abs(correlations(m)).max() < 0.1


@pytest.mark.parametrize("seed", [0, 1])
def test_full_signal_puts_signal_smells_on_top(seed):
    m = build_feature_matrix(generate(SynthConfig(formulas=3000, signal_strength=1.0, seed=seed)).corpus)
    r = correlations(m)
    top = set(np.argsort(-r)[:3].tolist())
    assert top == {8, 9, 11}


def test_written_corpus_loads_cleanly_and_is_byte_identical(tmp_path):
    config = SynthConfig(workbooks=2, sheets=2, formulas=400, fault_rate=0.05, seed=3)
    first = write_corpus(generate(config), tmp_path / "a")
    second = write_corpus(generate(config), tmp_path / "b")
    assert [p.name for p in first] == [p.name for p in second]
    assert all(p.read_bytes() == q.read_bytes() for p, q in zip(first, second))
    corpus = load_corpus([tmp_path / "a"], tmp_path / "a" / "labels.csv")
    assert all(not wb.parse_errors() for wb in corpus.workbooks)
    assert corpus.dangling == []
    assert corpus_summary(corpus).faulty == 20


def test_different_seeds_differ():
    a = generate(SynthConfig(workbooks=1, formulas=200, fault_rate=0.05, seed=0))
    b = generate(SynthConfig(workbooks=1, formulas=200, fault_rate=0.05, seed=1))
    assert a.labels != b.labels


@pytest.mark.parametrize("kwargs", [
    {"fault_rate": 0.0}, {"fault_rate": 1.0}, {"signal_smells": ()}, {"signal_smells": (19,)},
    {"signal_strength": 1.5}, {"workbooks": 0}, {"formulas": 100},
])
def test_invalid_configs(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs)


def test_zero_faults_is_infeasible():
    with pytest.raises(ValueError, match="no faults"):
        generate(SynthConfig(workbooks=1, sheets=1, formulas=20, fault_rate=0.01))
