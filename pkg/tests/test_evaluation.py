import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cipherid import classifiers as C, dataset, evaluation as E
from cipherid.alphabet import CIPHERS


# -- splitting ------------------------------------------------------------------

def test_full_scale_split_sizes():
    labels = np.repeat(np.arange(5), 1000)
    train, test = E.split_indices(labels, E.SplitSpec(seed=42))
    assert (train.size, test.size) == (4000, 1000)
    assert np.bincount(labels[test]).tolist() == [200] * 5


def test_tiny_split():
    labels = np.repeat([0, 1], 5)
    train, test = E.split_indices(labels)
    assert (train.size, test.size) == (8, 2)
    assert sorted(labels[test].tolist()) == [0, 1]


@settings(max_examples=30, deadline=None)
@given(counts=st.lists(st.integers(2, 40), min_size=2, max_size=5), seed=st.integers(0, 2**32 - 1))
def test_split_disjoint_covering_reproducible(counts, seed):
    labels = np.repeat(np.arange(len(counts)), counts)
    train, test = E.split_indices(labels, E.SplitSpec(seed=seed))
    assert np.intersect1d(train, test).size == 0
    assert np.array_equal(np.union1d(train, test), np.arange(labels.size))
    for c, n in enumerate(counts):
        assert 1 <= np.sum(labels[test] == c) <= n - 1
    again = E.split_indices(labels, E.SplitSpec(seed=seed))
    assert all(np.array_equal(a, b) for a, b in zip((train, test), again))


def test_split_equal_test_counts_for_balanced_input():
    labels = np.repeat(np.arange(5), 37)
    _, test = E.split_indices(labels, E.SplitSpec(seed=3))
    assert len(set(np.bincount(labels[test]).tolist())) == 1


def test_split_rejects_singleton_class():
    with pytest.raises(E.EvaluationError, match="fewer than 2"):
        E.split_indices([0, 0, 1])


def test_split_dataset(small_corpus):
    ds = dataset.generate(small_corpus, "fixed-fixed", 10, 30, seed=1)
    tr, te = E.split(ds)
    assert (len(tr), len(te)) == (40, 10)
    assert {m.cipher for m in te.messages} == set(CIPHERS)


def test_stratified_folds_balanced():
    labels = np.repeat(np.arange(5), 20)
    fold = E.stratified_folds(labels, 5, seed=0)
    for f in range(5):
        assert np.bincount(labels[fold == f], minlength=5).tolist() == [4] * 5
    assert np.array_equal(fold, E.stratified_folds(labels, 5, seed=0))


# -- metrics --------------------------------------------------------------------

def test_two_class_hand_computed():
    cm = E.ConfusionMatrix(np.array([[8, 2], [3, 7]]), (0, 1))
    r = E.report_from_confusion(cm)
    p0, r0 = 8 / 11, 0.8
    assert r.precision[0] == p0
    assert r.recall[0] == r0
    assert r.f1[0] == 2 * p0 * r0 / (p0 + r0)
    assert r.precision[1] == 7 / 9 and r.recall[1] == 0.7
    assert r.accuracy == 0.75
    assert r.support.tolist() == [10, 10]


def test_metrics_from_labels_builds_same_matrix():
    y_true = [0] * 10 + [1] * 10
    y_pred = [0] * 8 + [1] * 2 + [0] * 3 + [1] * 7
    r = E.metrics(y_true, y_pred)
    assert r.confusion.matrix.tolist() == [[8, 2], [3, 7]]


def test_perfect_predictions():
    y = np.repeat(np.arange(5), 4)
    r = E.metrics(y, y)
    assert r.accuracy == 1.0 and np.all(r.f1 == 1.0)
    assert r.zero_division == ()


def test_all_one_class_predictions():
    y = np.repeat(np.arange(5), 4)
    r = E.metrics(y, np.zeros_like(y), classes=tuple(range(5)))
    assert r.accuracy == 0.2
    assert r.precision[1:].tolist() == [0.0] * 4
    assert "precision[1]" in r.zero_division
    assert "zero division" in r.summary()


def test_length_mismatch():
    with pytest.raises(E.EvaluationError, match="length mismatch"):
        E.metrics([0, 1], [0])


@settings(max_examples=40, deadline=None)
@given(data=st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=60),
       perm=st.permutations(range(5)))
def test_metrics_permutation_equivariant(data, perm):
    t, p = map(np.array, zip(*data))
    perm = np.array(perm)
    a = E.metrics(t, p, classes=tuple(range(5)))
    b = E.metrics(perm[t], perm[p], classes=tuple(range(5)))
    assert b.accuracy == a.accuracy
    assert np.array_equal(b.confusion.matrix[np.ix_(perm, perm)], a.confusion.matrix)
    for name in ("precision", "recall", "f1", "support"):
        assert np.array_equal(getattr(b, name)[perm], getattr(a, name))


@settings(max_examples=40, deadline=None)
@given(data=st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=60))
def test_confusion_totals(data):
    t, p = map(np.array, zip(*data))
    r = E.metrics(t, p, classes=tuple(range(5)))
    assert r.confusion.total == len(data)
    assert r.accuracy == np.trace(r.confusion.matrix) / len(data)
    assert np.array_equal(r.confusion.support(), np.bincount(t, minlength=5))
    assert np.all(r.confusion.matrix >= 0)


# -- grid search ----------------------------------------------------------------

def _blobs(seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat(np.arange(3), 20)
    X = rng.normal(size=(60, 2)) + 3 * np.eye(3)[y][:, :2]
    return X, y


def test_singleton_grid():
    X, y = _blobs()
    res = E.grid_search_matrix(X, y, "knn", [C.KNNParams(k=3)])
    assert res.best == C.KNNParams(k=3) and res.best_index == 0
    assert len(res.points[0].fold_scores) == 5


def test_duplicate_point_tie_goes_to_first():
    X, y = _blobs()
    grid = [C.KNNParams(k=1), C.KNNParams(k=5), C.KNNParams(k=5)]
    res = E.grid_search_matrix(X, y, "knn", grid)
    assert res.points[1].score == res.points[2].score
    assert res.best_index != 2
    assert res.best_score == max(p.score for p in res.points)


def test_failed_points_recorded_not_fatal():
    X, y = _blobs()
    res = E.grid_search_matrix(X, y, "knn", {"k": [3, 500]})
    assert res.points[1].score is None and "exceeds" in res.points[1].error
    assert res.best.k == 3


def test_grid_dict_expansion_order():
    pts = E.expand_grid("svm", {"C": [1, 10], "gamma": [0.001, 0.0001]})
    assert [(p.C, p.gamma) for p in pts] == [(1, 0.001), (1, 0.0001), (10, 0.001), (10, 0.0001)]


def test_grid_search_reproducible_and_thread_independent(small_corpus):
    ds = dataset.generate(small_corpus, "random-random", 12, 60, seed=5)
    grid = {"k": [1, 3, 7], "weights": ["uniform", "distance"]}
    a = E.grid_search(ds, "histogram", "knn", grid, seed=2)
    b = E.grid_search(ds, "histogram", "knn", grid, seed=2, threads=3)
    assert [p.fold_scores for p in a.points] == [p.fold_scores for p in b.points]
    assert a.best_index == b.best_index


def test_empty_grid():
    X, y = _blobs()
    with pytest.raises(E.EvaluationError, match="empty"):
        E.grid_search_matrix(X, y, "knn", [])


# -- suites ---------------------------------------------------------------------

def test_tiny_fixed_fixed_suite_well_formed(small_corpus, tmp_path):
    res = E.scenario_suite(small_corpus, "fixed-fixed", per_cipher=10, length=60, seed=1)
    assert res.errors == {}
    table = res.table()
    assert len(table) == 15
    assert all(0.0 <= a <= 1.0 for a in table.values())
    for rep in res.reports.values():
        assert rep.support.tolist() == [2] * 5
    assert "k clamped" in res.reports[("knn", "histogram")].metadata["adjusted"]
    E.write_accuracy_table(tmp_path / "acc.csv", res)
    rows = list(csv.reader(open(tmp_path / "acc.csv")))
    assert rows[0] == ["model", "histogram", "digram", "sequence"]
    assert [r[0] for r in rows[1:]] == list(C.FAMILIES)


def test_suite_reproducible(small_corpus):
    ds = dataset.generate(small_corpus, "random-random", 10, 80, seed=4)
    kw = dict(dataset=ds, seed=3, families=("svm", "rf", "elm"), kinds=("histogram",))
    a, b = E.scenario_suite(**kw), E.scenario_suite(**kw, threads=3)
    assert a.table(("svm", "rf", "elm"), ("histogram",)) == b.table(("svm", "rf", "elm"), ("histogram",))


def test_suite_records_cell_errors(small_corpus):
    ds = dataset.generate(small_corpus, "random-random", 6, 40, seed=4)
    bad = {("mlp", "histogram"): C.MLPParams(hidden_layout=(4,), solver="sgd", learning_rate=1e9,
                                             max_iter=30)}
    with np.errstate(all="ignore"):
        res = E.scenario_suite(dataset=ds, families=("mlp", "knn"), kinds=("histogram",), hyperparameters=bad)
    assert "DivergenceError" in res.errors[("mlp", "histogram")]
    assert ("knn", "histogram") in res.reports


def test_suite_needs_data():
    with pytest.raises(E.EvaluationError):
        E.scenario_suite()


def test_length_study_structure(small_corpus, tmp_path):
    ds = dataset.generate(small_corpus, "random-random", 10, 100, seed=6)
    study = E.length_study(ds, [100, 50, 20], families=("svm", "knn"),
                           hyperparameters={("knn", "digram"): C.KNNParams(k=3)})
    assert study.errors == {}
    assert set(study.accuracy) == {(f, L) for f in ("svm", "knn") for L in (100, 50, 20)}
    # full length reproduces the standard evaluation
    suite = E.scenario_suite(dataset=ds, families=("svm",), kinds=("digram",))
    assert study.accuracy[("svm", 100)] == suite.accuracy("svm", "digram")
    E.write_length_table(tmp_path / "len.csv", study)
    assert open(tmp_path / "len.csv").read().splitlines()[0] == "length,svm,knn"


def test_length_study_sequence_retrains(small_corpus):
    ds = dataset.generate(small_corpus, "random-random", 10, 60, seed=6)
    study = E.length_study(ds, [60, 30], families=("elm",), kind="sequence",
                           hyperparameters={("elm", "sequence"): C.ELMParams(hidden_neurons=10)})
    assert study.errors == {} and len(study.accuracy) == 2


def test_length_study_rejects_long_lengths(small_corpus):
    ds = dataset.generate(small_corpus, "random-random", 4, 40, seed=6)
    with pytest.raises(E.EvaluationError, match="outside"):
        E.length_study(ds, [41])
    with pytest.raises(E.EvaluationError):
        E.length_study(ds, [20], kind="histogram")


def test_report_writers(tmp_path):
    cm = E.ConfusionMatrix(np.diag([2, 2, 2, 2, 2]), tuple(range(5)))
    rep = E.report_from_confusion(cm)
    E.write_confusion(tmp_path / "c.csv", cm)
    E.write_class_report(tmp_path / "r.csv", rep)
    lines = open(tmp_path / "c.csv").read().splitlines()
    assert lines[0] == "true\\predicted," + ",".join(CIPHERS)
    assert lines[1] == "enigma,2,0,0,0,0"
    assert open(tmp_path / "r.csv").read().splitlines()[-1] == "accuracy,,,1.0000,10"
