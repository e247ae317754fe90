"""Stratified splits, metrics, grid search and the experiment drivers.

All randomness flows from an explicit seed through named sub-seeds
(``derive_seed(seed, "split")``, ``derive_seed(seed, "model", family, kind)``
and so on), so results do not depend on the number of worker threads.
"""

import csv
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import classifiers, dataset as ds_mod, features
from .alphabet import CIPHERS, derive_seed

log = logging.getLogger(__name__)

FAMILIES = classifiers.FAMILIES
KINDS = features.KINDS


class EvaluationError(ValueError):
    pass


def _map(fn, items, threads):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- splitting ---------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    stratified: bool = True
    seed: int = 0


def split_indices(labels, spec=SplitSpec()):
    """Train and test index arrays, stratified by label.

    Each class contributes ``round(n_c * (1 - train_fraction))`` test
    samples, clamped so both sides keep at least one sample.
    """
    labels = np.asarray(labels)
    if not 0 < spec.train_fraction < 1:
        raise EvaluationError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(derive_seed(spec.seed, "split"))
    if not spec.stratified:
        order = rng.permutation(labels.size)
        n_test = min(max(round(labels.size * (1 - spec.train_fraction)), 1), labels.size - 1)
        return np.sort(order[n_test:]), np.sort(order[:n_test])
    test = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size < 2:
            raise EvaluationError(f"class {c!r} has fewer than 2 samples")
        k = min(max(round(members.size * (1 - spec.train_fraction)), 1), members.size - 1)
        test.append(rng.permutation(members)[:k])
    test = np.sort(np.concatenate(test))
    train = np.setdiff1d(np.arange(labels.size), test)
    return train, test


def split(data, spec=SplitSpec()):
    """Split a Dataset into two Datasets, or a label array into index arrays."""
    if isinstance(data, ds_mod.Dataset):
        train, test = split_indices(data.labels(), spec)
        return data.subset(train), data.subset(test)
    return split_indices(data, spec)


def stratified_folds(labels, n_folds, seed):
    """Fold number of every sample; each class is dealt round-robin after a shuffle."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(derive_seed(seed, "folds"))
    fold = np.empty(labels.size, dtype=np.int64)
    for c in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == c))
        fold[members] = np.arange(members.size) % n_folds
    return fold


# -- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""
    matrix: np.ndarray
    classes: tuple

    @property
    def total(self):
        return int(self.matrix.sum())

    def support(self):
        return self.matrix.sum(axis=1)


@dataclass(frozen=True)
class EvaluationReport:
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion: ConfusionMatrix
    zero_division: tuple = ()
    metadata: dict = field(default_factory=dict)

    @property
    def classes(self):
        return self.confusion.classes

    def summary(self):
        name_w = max(9, *(len(str(c)) for c in self.classes))
        lines = [f"{'class':<{name_w}} precision recall     f1 support"]
        for i, c in enumerate(self.classes):
            lines.append(f"{str(c):<{name_w}} {self.precision[i]:9.4f} {self.recall[i]:6.4f} "
                         f"{self.f1[i]:6.4f} {int(self.support[i]):7d}")
        lines.append(f"accuracy {self.accuracy:.4f} over {self.confusion.total} samples")
        if self.zero_division:
            lines.append("zero division (set to 0): " + ", ".join(self.zero_division))
        return "\n".join(lines)


def confusion_matrix(y_true, y_pred, classes):
    index = {c: i for i, c in enumerate(classes)}
    try:
        t = np.array([index[v] for v in np.asarray(y_true).tolist()], dtype=np.int64)
        p = np.array([index[v] for v in np.asarray(y_pred).tolist()], dtype=np.int64)
    except KeyError as exc:
        raise EvaluationError(f"label {exc.args[0]!r} not among the classes") from None
    m = np.zeros((len(classes), len(classes)), dtype=np.int64)
    np.add.at(m, (t, p), 1)
    return ConfusionMatrix(m, tuple(classes))


def _ratio(num, den, what, classes, flags):
    out = np.zeros(num.shape, dtype=np.float64)
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    flags.extend(f"{what}[{classes[i]}]" for i in np.flatnonzero(~ok))
    return out


def metrics(y_true, y_pred, classes=None, metadata=None):
    """Accuracy and per-class precision, recall, F1 and support.

    Zero denominators give 0 and are listed in ``zero_division``.
    """
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise EvaluationError(f"length mismatch: {y_true.size} true labels, {y_pred.size} predictions")
    if classes is None:
        classes = tuple(np.unique(np.concatenate([y_true, y_pred])).tolist())
    cm = confusion_matrix(y_true, y_pred, classes)
    return report_from_confusion(cm, metadata)


def report_from_confusion(cm, metadata=None):
    m = cm.matrix
    tp = np.diag(m).astype(np.float64)
    support = m.sum(axis=1)
    predicted = m.sum(axis=0)
    flags = []
    precision = _ratio(tp, predicted, "precision", cm.classes, flags)
    recall = _ratio(tp, support, "recall", cm.classes, flags)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", cm.classes, flags)
    accuracy = float(tp.sum() / m.sum()) if m.sum() else 0.0
    return EvaluationReport(accuracy, precision, recall, f1, support, cm, tuple(flags), dict(metadata or {}))


# -- grid search ---------------------------------------------------------------

@dataclass(frozen=True)
class GridPoint:
    hyperparameters: object
    score: float = None
    fold_scores: tuple = ()
    error: str = ""


@dataclass(frozen=True)
class GridResult:
    family: str
    points: tuple
    best_index: int

    @property
    def best(self):
        return self.points[self.best_index].hyperparameters

    @property
    def best_score(self):
        return self.points[self.best_index].score


def expand_grid(family, grid):
    """Hyperparameter records from a list of records or a dict of value lists.

    Dict grids expand as a cartesian product in key order, last key fastest.
    """
    if isinstance(grid, dict):
        names = list(grid)
        return [classifiers.make_params(family, **dict(zip(names, combo)))
                for combo in itertools.product(*(grid[n] for n in names))]
    return [hp if not isinstance(hp, dict) else classifiers.make_params(family, **hp) for hp in grid]


def grid_search_matrix(X, y, family, grid, seed=0, n_folds=5, threads=1, standardize=None):
    """Score every grid point by stratified k-fold cross-validation.

    A point that fails to train is recorded with its error and never
    selected. Ties go to the earliest point.
    """
    points = expand_grid(family, grid)
    if not points:
        raise EvaluationError("empty grid")
    X, y = np.asarray(X, dtype=np.float64), np.asarray(y)
    fold = stratified_folds(y, n_folds, seed)
    model_seed = derive_seed(seed, "model", family)

    def evaluate(hp):
        scores = []
        try:
            for f in range(n_folds):
                tr, va = fold != f, fold == f
                model = classifiers.train(family, X[tr], y[tr], hp, model_seed, standardize)
                scores.append(float(np.mean(classifiers.predict(model, X[va]) == y[va])))
        except Exception as exc:  # recorded per point, never fatal
            log.warning("grid point %s failed: %s", hp, exc)
            return GridPoint(hp, None, tuple(scores), f"{type(exc).__name__}: {exc}")
        return GridPoint(hp, float(np.mean(scores)), tuple(scores))

    results = tuple(_map(evaluate, points, threads))
    valid = [i for i, p in enumerate(results) if p.score is not None]
    if not valid:
        raise EvaluationError("every grid point failed to train")
    best = max(valid, key=lambda i: (results[i].score, -i))
    return GridResult(family, results, best)


def grid_search(dataset, feature_kind, family, grid, seed=0, split_spec=None, **kw):
    """Grid search on the training portion of `dataset` only."""
    spec = split_spec or SplitSpec(seed=seed)
    X = features.matrix(dataset.texts(), feature_kind)
    y = dataset.labels()
    train, _ = split_indices(y, spec)
    return grid_search_matrix(X[train], y[train], family, grid, seed, **kw)


# -- experiments -----------------------------------------------------------------

@dataclass
class SuiteResult:
    scenario: str
    reports: dict = field(default_factory=dict)   # (family, kind) -> EvaluationReport
    errors: dict = field(default_factory=dict)    # (family, kind) -> message
    models: dict = field(default_factory=dict)

    def accuracy(self, family, kind):
        r = self.reports.get((family, kind))
        return None if r is None else r.accuracy

    def table(self, families=FAMILIES, kinds=KINDS):
        return {(f, k): self.accuracy(f, k) for f in families for k in kinds}


def evaluate_model(model, X, y, metadata=None):
    pred = classifiers.predict(model, X)
    return metrics(y, pred, classes=tuple(range(len(CIPHERS))), metadata=metadata)


def fit_to_data(hp, n_train):
    """Clamp settings that cannot apply to a small training set.

    Returns ``(hp, note)``; only k-NN's k is ever adjusted.
    """
    if hp.family == "knn" and hp.k > n_train:
        return replace(hp, k=n_train), f"k clamped from {hp.k} to {n_train}"
    return hp, ""


def scenario_suite(corpus=None, scenario="random-random", per_cipher=1000, length=1000, seed=0,
                   families=FAMILIES, kinds=KINDS, hyperparameters=None, threads=1,
                   dataset=None, keep_models=False):
    """Train and test every (family, feature) cell with the selected settings.

    Pass `dataset` to reuse existing messages; otherwise one is generated
    from `corpus`. `hyperparameters` maps ``(family, kind)`` to overrides.
    """
    if dataset is None:
        if corpus is None:
            raise EvaluationError("scenario_suite needs a corpus or a dataset")
        dataset = ds_mod.generate(corpus, scenario, per_cipher, length,
                                  derive_seed(seed, "dataset"), threads)
    scenario = dataset.manifest.scenario
    y = dataset.labels()
    train, test = split_indices(y, SplitSpec(seed=seed))
    texts = dataset.texts()
    result = SuiteResult(scenario)
    for kind in kinds:
        X = features.matrix(texts, kind)

        def cell(family, kind=kind, X=X):
            hp = (hyperparameters or {}).get((family, kind)) or classifiers.selected(family, kind)
            hp, note = fit_to_data(hp, train.size)
            meta = {"scenario": scenario, "family": family, "feature": kind, "seed": seed,
                    "hyperparameters": hp}
            if note:
                meta["adjusted"] = note
            try:
                model = classifiers.train(family, X[train], y[train], hp, derive_seed(seed, "model", family, kind))
                return model, evaluate_model(model, X[test], y[test], meta), None
            except Exception as exc:
                log.error("cell %s x %s failed: %s", family, kind, exc)
                return None, None, f"{type(exc).__name__}: {exc}"

        for family, (model, report, err) in zip(families, _map(cell, families, threads)):
            if err:
                result.errors[(family, kind)] = err
            else:
                result.reports[(family, kind)] = report
                if keep_models:
                    result.models[(family, kind)] = model
    return result


@dataclass
class LengthStudy:
    kind: str
    lengths: tuple
    families: tuple
    accuracy: dict = field(default_factory=dict)   # (family, length) -> float
    errors: dict = field(default_factory=dict)

    def rows(self):
        for L in self.lengths:
            yield L, [self.accuracy.get((f, L)) for f in self.families]


def length_study(dataset, lengths, families=("svm", "mlp"), kind="digram", seed=0,
                 hyperparameters=None, threads=1):
    """Accuracy against ciphertext length.

    ``digram``: one model per family trained on full-length messages,
    tested on features of truncated test messages. ``sequence``: the
    input dimension changes with length, so each length retrains with the
    full-length hyperparameters.
    """
    if kind not in ("digram", "sequence"):
        raise EvaluationError("length study supports the digram and sequence features")
    full = dataset.manifest.length
    lengths = tuple(int(L) for L in lengths)
    bad = [L for L in lengths if L > full or L < 2]
    if bad:
        raise EvaluationError(f"lengths {bad} outside [2, {full}]")
    y = dataset.labels()
    train, test = split_indices(y, SplitSpec(seed=seed))
    texts = dataset.texts()
    study = LengthStudy(kind, lengths, tuple(families))

    def hp_for(family):
        return (hyperparameters or {}).get((family, kind)) or classifiers.selected(family, kind)

    def run(family):
        out, errs = {}, {}
        model_seed = derive_seed(seed, "model", family, kind)
        try:
            if kind == "digram":
                X = features.matrix(texts, kind)
                model = classifiers.train(family, X[train], y[train], hp_for(family), model_seed)
                test_texts = [texts[i] for i in test]
                for L in lengths:
                    Xt = features.matrix(test_texts, kind, length=L)
                    out[L] = float(np.mean(classifiers.predict(model, Xt) == y[test]))
            else:
                for L in lengths:
                    X = features.matrix(texts, kind, length=L)
                    model = classifiers.train(family, X[train], y[train], hp_for(family), model_seed)
                    out[L] = float(np.mean(classifiers.predict(model, X[test]) == y[test]))
        except Exception as exc:
            log.error("length study %s failed: %s", family, exc)
            errs[family] = f"{type(exc).__name__}: {exc}"
        return family, out, errs

    for family, out, errs in _map(run, families, threads):
        study.accuracy.update({(family, L): a for L, a in out.items()})
        study.errors.update(errs)
    return study


# -- report files ------------------------------------------------------------------

def write_accuracy_table(path, suite, families=FAMILIES, kinds=KINDS):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["model", *kinds])
        for fam in families:
            row = [suite.accuracy(fam, k) for k in kinds]
            w.writerow([fam] + ["" if a is None else f"{a:.4f}" for a in row])


def write_confusion(path, cm, names=CIPHERS):
    labels = [names[c] if isinstance(c, int) and c < len(names) else str(c) for c in cm.classes]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["true\\predicted", *labels])
        for name, row in zip(labels, cm.matrix):
            w.writerow([name, *map(int, row)])


def write_class_report(path, report, names=CIPHERS):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["class", "precision", "recall", "f1", "support"])
        for i, c in enumerate(report.classes):
            name = names[c] if isinstance(c, int) and c < len(names) else str(c)
            w.writerow([name, f"{report.precision[i]:.4f}", f"{report.recall[i]:.4f}",
                        f"{report.f1[i]:.4f}", int(report.support[i])])
        w.writerow(["accuracy", "", "", f"{report.accuracy:.4f}", int(report.support.sum())])


def write_length_table(path, study):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["length", *study.families])
        for L, accs in study.rows():
            w.writerow([L] + ["" if a is None else f"{a:.4f}" for a in accs])


def write_grid(path, result):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["index", "hyperparameters", "cv_accuracy", "error", "selected"])
        for i, p in enumerate(result.points):
            w.writerow([i, repr(p.hyperparameters), "" if p.score is None else f"{p.score:.4f}",
                        p.error, "*" if i == result.best_index else ""])
