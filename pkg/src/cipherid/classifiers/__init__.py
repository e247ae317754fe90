"""Five classifier families behind one train / predict contract.

>>> model = train("knn", X, y, KNNParams(k=3))
>>> labels = predict(model, X_new)

Every family module exposes ``fit(X, y_idx, n_classes, hp, seed)``
returning a dict of arrays and ``scores(params, X, hp, n_classes)``.
Labels may be integers or strings; predictions come back in the same type
and ties in the score matrix go to the earliest class in sorted order,
which for cipher names is the fixed class order.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from types import MappingProxyType

import numpy as np

from . import elm, forest, knn, mlp, svm
from .elm import ELMParams
from .forest import ForestParams
from .knn import KNNParams
from .mlp import DivergenceError, MLPParams
from .svm import SVMParams

log = logging.getLogger(__name__)

FAMILIES = ("svm", "knn", "rf", "mlp", "elm")
MODULES = {"svm": svm, "knn": knn, "rf": forest, "mlp": mlp, "elm": elm}
PARAM_TYPES = {"svm": SVMParams, "knn": KNNParams, "rf": ForestParams, "mlp": MLPParams, "elm": ELMParams}
FORMAT_VERSION = 1

# Tested values per hyperparameter; anything else is flagged out-of-grid.
GRIDS = {
    "svm": {"C": (1, 10, 100, 1000), "gamma": (0.001, 0.0001), "kernel": svm.KERNELS},
    "knn": {"k": range(1, 201), "metric": knn.METRICS, "weights": knn.WEIGHTS},
    "rf": {"n_estimators": range(1, 201), "max_depth": (4, 5, 6, 7, 8), "criterion": forest.CRITERIA},
    "mlp": {
        "activation": ("tanh", "relu"), "alpha": (0.0001, 0.05),
        "hidden_layout": ((100, 200, 15), (150, 100, 50), (500,)),
        "max_iter": (200, 500, 1000), "solver": ("sgd", "adam"),
    },
    "elm": {"activation": elm.ACTIVATIONS, "hidden_neurons": range(1, 1001)},
}

# Selected configuration per (family, feature kind).
SELECTED = {
    ("svm", "histogram"): SVMParams(C=100, gamma=0.001, kernel="rbf"),
    ("svm", "digram"): SVMParams(C=1, gamma=0.001, kernel="rbf"),
    ("svm", "sequence"): SVMParams(C=1, gamma=0.0001, kernel="rbf"),
    ("knn", "histogram"): KNNParams(k=83, metric="euclidean", weights="uniform"),
    ("knn", "digram"): KNNParams(k=98, metric="euclidean", weights="uniform"),
    ("knn", "sequence"): KNNParams(k=74, metric="manhattan", weights="uniform"),
    ("rf", "histogram"): ForestParams(n_estimators=192, max_depth=8, criterion="gini"),
    ("rf", "digram"): ForestParams(n_estimators=197, max_depth=8, criterion="gini"),
    ("rf", "sequence"): ForestParams(n_estimators=177, max_depth=8, criterion="gini"),
    ("mlp", "histogram"): MLPParams((500,), "relu", 1e-4, 200, "adam"),
    ("mlp", "digram"): MLPParams((500,), "relu", 1e-4, 200, "adam"),
    ("mlp", "sequence"): MLPParams((500,), "tanh", 1e-4, 200, "adam"),
    ("elm", "histogram"): ELMParams(hidden_neurons=133, activation="relu"),
    ("elm", "digram"): ELMParams(hidden_neurons=9696, activation="tanh"),
    ("elm", "sequence"): ELMParams(hidden_neurons=995, activation="tanh"),
}


class ModelError(ValueError):
    pass


class DimensionMismatchError(ModelError):
    pass


def selected(family, kind):
    return SELECTED[(family, kind)]


def make_params(family, **values):
    if family not in PARAM_TYPES:
        raise ModelError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    if "hidden_layout" in values:
        values["hidden_layout"] = tuple(values["hidden_layout"])
    return PARAM_TYPES[family](**values)


def out_of_grid(hp):
    """Descriptions of hyperparameter values outside the tested grid."""
    flags = []
    for name, allowed in GRIDS[hp.family].items():
        value = getattr(hp, name)
        if value not in allowed:
            flags.append(f"{hp.family}.{name}={value!r} is outside the tested grid")
    return flags


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TrainedModel:
    family: str
    hyperparameters: object
    params: MappingProxyType
    classes: np.ndarray
    n_features: int
    seed: int = 0
    mean: np.ndarray = None
    scale: np.ndarray = None
    out_of_grid: tuple = field(default=())

    @property
    def standardized(self):
        return self.mean is not None

    def preprocess(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionMismatchError(
                f"model expects {self.n_features} features, got shape {X.shape}")
        if self.mean is None:
            return X
        return (X - self.mean) / self.scale


def standardization(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def train(family, X, y, hp=None, seed=0, standardize=None):
    """Fit one model. `standardize` defaults to the family's convention."""
    hp = hp if hp is not None else PARAM_TYPES.get(family, lambda: None)()
    if hp is None or hp.family != family:
        raise ModelError(f"hyperparameters do not belong to family {family!r}")
    hp.validate()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"X has shape {X.shape} but y has {y.shape[0]} labels")
    classes, y_idx = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise ModelError("training data must contain at least two classes")
    flags = tuple(out_of_grid(hp))
    for f in flags:
        log.warning(f)
    if standardize is None:
        standardize = hp.standardize_default
    mean = scale = None
    if standardize:
        mean, scale = standardization(X)
        X = (X - mean) / scale
    params = MODULES[family].fit(X, y_idx.astype(np.int64), classes.size, hp, seed)
    return TrainedModel(
        family=family, hyperparameters=hp,
        params=MappingProxyType({k: _readonly(v) for k, v in params.items()}),
        classes=_readonly(classes), n_features=X.shape[1], seed=int(seed),
        mean=None if mean is None else _readonly(mean),
        scale=None if scale is None else _readonly(scale),
        out_of_grid=flags,
    )


def train_svm(X, y, hp=None, seed=0, **kw):
    return train("svm", X, y, hp, seed, **kw)


def train_knn(X, y, hp=None, **kw):
    return train("knn", X, y, hp, 0, **kw)


def train_rf(X, y, hp=None, seed=0, **kw):
    return train("rf", X, y, hp, seed, **kw)


def train_mlp(X, y, hp=None, seed=0, **kw):
    return train("mlp", X, y, hp, seed, **kw)


def train_elm(X, y, hp=None, seed=0, **kw):
    return train("elm", X, y, hp, seed, **kw)


def predict_scores(model, X):
    """Per-class scores, one column per entry of ``model.classes``."""
    X = model.preprocess(X)
    return MODULES[model.family].scores(model.params, X, model.hyperparameters, model.classes.size)


def predict(model, X):
    return model.classes[np.argmax(predict_scores(model, X), axis=1)]


def one_hot(y, n_classes=5):
    """Indicator rows for integer class indices."""
    y = np.asarray(y, dtype=np.int64)
    return np.eye(n_classes, dtype=np.int64)[y]


# -- persistence -------------------------------------------------------------

def save_model(model, path):
    """Write an ``.npz`` holding the arrays and a JSON metadata record."""
    meta = {
        "format_version": FORMAT_VERSION,
        "family": model.family,
        "hyperparameters": asdict(model.hyperparameters),
        "n_features": model.n_features,
        "seed": model.seed,
        "out_of_grid": list(model.out_of_grid),
    }
    arrays = {f"param.{k}": np.asarray(v) for k, v in model.params.items()}
    arrays["classes"] = np.asarray(model.classes)
    if model.mean is not None:
        arrays["mean"] = model.mean
        arrays["scale"] = model.scale
    with open(path, "wb") as f:
        np.savez(f, meta=np.array(json.dumps(meta)), **arrays)
    return path


def load_model(path):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ModelError(f"unsupported model format version {meta.get('format_version')!r}")
        arrays = {k: data[k] for k in data.files}
    family = meta["family"]
    hp = make_params(family, **meta["hyperparameters"])
    params = {k[len("param."):]: _readonly(v) for k, v in arrays.items() if k.startswith("param.")}
    return TrainedModel(
        family=family, hyperparameters=hp, params=MappingProxyType(params),
        classes=_readonly(arrays["classes"]), n_features=int(meta["n_features"]),
        seed=int(meta["seed"]),
        mean=_readonly(arrays["mean"]) if "mean" in arrays else None,
        scale=_readonly(arrays["scale"]) if "scale" in arrays else None,
        out_of_grid=tuple(meta.get("out_of_grid", ())),
    )


__all__ = [
    "FAMILIES", "GRIDS", "SELECTED", "SVMParams", "KNNParams", "ForestParams", "MLPParams", "ELMParams",
    "TrainedModel", "ModelError", "DimensionMismatchError", "DivergenceError",
    "train", "train_svm", "train_knn", "train_rf", "train_mlp", "train_elm",
    "predict", "predict_scores", "one_hot", "selected", "make_params", "out_of_grid",
    "save_model", "load_model",
]
