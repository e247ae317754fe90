"""k-nearest-neighbour vote over the stored training set."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

METRICS = ("euclidean", "manhattan", "minkowski")
WEIGHTS = ("uniform", "distance")
MINKOWSKI_P = 3
EPS = 1e-12
CHUNK = 512


@dataclass(frozen=True)
class KNNParams:
    k: int = 5
    metric: str = "euclidean"
    weights: str = "uniform"

    family = "knn"
    standardize_default = False

    def validate(self):
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.weights not in WEIGHTS:
            raise ValueError(f"unknown weights {self.weights!r}")


def distances(A, B, metric):
    if metric == "euclidean":
        return cdist(A, B, "euclidean")
    if metric == "manhattan":
        return cdist(A, B, "cityblock")
    return cdist(A, B, "minkowski", p=MINKOWSKI_P)


def fit(X, y, n_classes, hp, seed=0):
    hp.validate()
    if hp.k > X.shape[0]:
        raise ValueError(f"k={hp.k} exceeds the {X.shape[0]} training samples")
    return {"X": X.copy(), "y": y.astype(np.int64)}


def neighbors(params, X, hp):
    """Indices and distances of the k nearest training points, closest first.

    Equal distances keep training order.
    """
    idx, dist = [], []
    for start in range(0, X.shape[0], CHUNK):
        D = distances(X[start:start + CHUNK], params["X"], hp.metric)
        order = np.argsort(D, axis=1, kind="stable")[:, :hp.k]
        idx.append(order)
        dist.append(np.take_along_axis(D, order, axis=1))
    if not idx:
        return np.zeros((0, hp.k), dtype=np.int64), np.zeros((0, hp.k))
    return np.vstack(idx), np.vstack(dist)


def scores(params, X, hp, n_classes):
    """Fraction of (weighted) neighbour votes per class."""
    idx, dist = neighbors(params, X, hp)
    labels = params["y"][idx]
    w = np.ones_like(dist) if hp.weights == "uniform" else 1.0 / (dist + EPS)
    votes = np.zeros((X.shape[0], n_classes))
    rows = np.repeat(np.arange(X.shape[0]), hp.k)
    np.add.at(votes, (rows, labels.ravel()), w.ravel())
    return votes / votes.sum(axis=1, keepdims=True)
