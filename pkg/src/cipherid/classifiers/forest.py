"""Random forest of CART trees grown on bootstrap samples."""

import math
from dataclasses import dataclass

import numpy as np

CRITERIA = ("gini", "entropy")


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 100
    max_depth: int = 8
    criterion: str = "gini"
    max_features: str = "sqrt"

    family = "rf"
    standardize_default = False

    def validate(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be at least 1")
        if self.max_depth <= 0:
            raise ValueError(f"max_depth must be positive, got {self.max_depth}")
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.max_features != "sqrt":
            raise ValueError("only max_features='sqrt' is supported")


def impurity(counts, criterion):
    """Gini or entropy (bits) of class counts along the last axis."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts), where=total > 0)
    if criterion == "gini":
        return 1.0 - (p * p).sum(axis=-1)
    logp = np.log2(p, out=np.zeros_like(p), where=p > 0)
    return -(p * logp).sum(axis=-1)


def best_split(X, y, n_classes, features, criterion):
    """Best (feature, threshold) over `features`, or None if no split exists.

    Thresholds are midpoints between consecutive distinct values; samples
    with ``x <= threshold`` go left. Ties keep the first candidate in
    `features` order, then the lowest threshold.
    """
    n = X.shape[0]
    Xs = X[:, features]
    order = np.argsort(Xs, axis=0, kind="stable")
    vals = np.take_along_axis(Xs, order, axis=0)
    onehot = np.eye(n_classes)[y[order]]                     # (n, m, C)
    left = np.cumsum(onehot, axis=0)[:-1]                    # left sizes 1..n-1
    right = onehot.sum(axis=0) - left
    valid = vals[:-1] < vals[1:]
    if not valid.any():
        return None
    nl = np.arange(1, n)[:, None]
    child = (nl * impurity(left, criterion) + (n - nl) * impurity(right, criterion)) / n
    child = np.where(valid, child, np.inf)
    # Column-major argmin: first feature in draw order wins ties.
    flat = int(np.argmin(child.T))
    f, i = divmod(flat, n - 1)
    return features[f], (vals[i, f] + vals[i + 1, f]) / 2.0, child[i, f]


def grow_tree(X, y, n_classes, max_depth, criterion, n_sub, rng):
    """Grow one tree breadth-first; returns flat node arrays."""
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(np.bincount(y[idx], minlength=n_classes))
        return len(feature) - 1

    queue = [(new_node(np.arange(X.shape[0])), np.arange(X.shape[0]), 0)]
    d = X.shape[1]
    while queue:
        nxt = []
        for node, idx, depth in queue:
            counts = value[node]
            if depth >= max_depth or np.count_nonzero(counts) <= 1:
                continue
            feats = rng.choice(d, size=n_sub, replace=False)
            found = best_split(X[idx], y[idx], n_classes, feats, criterion)
            if found is None:
                continue
            f, thr, _ = found
            go_left = X[idx, f] <= thr
            li, ri = idx[go_left], idx[~go_left]
            feature[node], threshold[node] = int(f), float(thr)
            left[node], right[node] = new_node(li), new_node(ri)
            nxt += [(left[node], li, depth + 1), (right[node], ri, depth + 1)]
        queue = nxt
    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value, dtype=np.float64).reshape(-1, n_classes),
    }


def tree_leaves(tree, X, max_depth):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    for _ in range(max_depth):
        f = tree["feature"][node]
        internal = f >= 0
        if not internal.any():
            break
        go_left = X[rows, np.maximum(f, 0)] <= tree["threshold"][node]
        step = np.where(go_left, tree["left"][node], tree["right"][node])
        node = np.where(internal, step, node)
    return node


def tree_seed(seed, t):
    return np.random.SeedSequence([seed, t])


def fit(X, y, n_classes, hp, seed=0, bootstrap=True):
    """Grow the forest. Tree t draws its bootstrap and feature subsets from
    its own generator seeded with ``(seed, t)``, so the trees do not depend
    on each other or on `max_depth`."""
    hp.validate()
    n, d = X.shape
    n_sub = max(1, math.ceil(math.sqrt(d)))
    trees = []
    for t in range(hp.n_estimators):
        trng = np.random.default_rng(tree_seed(seed, t))
        idx = trng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(grow_tree(X[idx], y[idx], n_classes, hp.max_depth, hp.criterion, n_sub, trng))
    sizes = np.array([len(t["feature"]) for t in trees], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    cat = {k: np.concatenate([t[k] for t in trees]) for k in ("feature", "threshold", "value")}
    for k in ("left", "right"):
        cat[k] = np.concatenate([np.where(t[k] >= 0, t[k] + o, -1) for t, o in zip(trees, offsets)])
    cat["offsets"] = offsets
    return cat


def _tree(params, t):
    lo, hi = params["offsets"][t], params["offsets"][t + 1]
    return {
        "feature": params["feature"][lo:hi],
        "threshold": params["threshold"][lo:hi],
        "left": np.where(params["left"][lo:hi] >= 0, params["left"][lo:hi] - lo, -1),
        "right": np.where(params["right"][lo:hi] >= 0, params["right"][lo:hi] - lo, -1),
        "value": params["value"][lo:hi],
    }


def scores(params, X, hp, n_classes):
    """Fraction of trees voting for each class (each tree votes its leaf majority)."""
    votes = np.zeros((X.shape[0], n_classes))
    rows = np.arange(X.shape[0])
    for t in range(len(params["offsets"]) - 1):
        tree = _tree(params, t)
        leaf = tree_leaves(tree, X, hp.max_depth)
        votes[rows, np.argmax(tree["value"][leaf], axis=1)] += 1
    return votes / votes.sum(axis=1, keepdims=True)
