"""Histogram, digram and raw letter-sequence features.

Single-message functions return a :class:`FeatureVector`; :func:`matrix`
builds the ``(n, d)`` design matrix for a batch of equal-length messages.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .alphabet import CIPHERS, to_ints

KINDS = ("histogram", "digram", "sequence")


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    kind: str
    values: np.ndarray

    @property
    def dim(self):
        return self.values.shape[0]


def _ints(text):
    if isinstance(text, np.ndarray):
        return text.astype(np.int64)
    try:
        return to_ints(text).astype(np.int64)
    except ValueError as exc:
        raise FeatureError(str(exc)) from None


def histogram(text):
    x = _ints(text)
    if x.size == 0:
        raise FeatureError("histogram of an empty text")
    return FeatureVector("histogram", np.bincount(x, minlength=26) / x.size)


def digram(text):
    """Overlapping digram frequencies: index 26*a + b counts the pair ab."""
    x = _ints(text)
    if x.size < 2:
        raise FeatureError("digram needs at least two letters")
    return FeatureVector("digram", np.bincount(26 * x[:-1] + x[1:], minlength=676) / (x.size - 1))


def sequence(text):
    x = _ints(text)
    if x.size == 0:
        raise FeatureError("sequence of an empty text")
    return FeatureVector("sequence", x.astype(np.float64))


_EXTRACTORS = {"histogram": histogram, "digram": digram, "sequence": sequence}


def extract(text, kind):
    if kind not in _EXTRACTORS:
        raise FeatureError(f"unknown feature kind {kind!r}")
    return _EXTRACTORS[kind](text)


def truncate_and_extract(text, length, kind):
    """Features of the first `length` letters of `text`."""
    if length > len(text):
        raise FeatureError(f"cannot truncate a {len(text)}-letter text to {length}")
    return extract(text[:length], kind)


def _batch(texts):
    if isinstance(texts, np.ndarray):
        return texts.astype(np.int64)
    if not texts:
        return np.zeros((0, 0), dtype=np.int64)
    lengths = {len(t) for t in texts}
    if len(lengths) != 1:
        raise FeatureError("batched messages must share one length")
    joined = "".join(texts)
    try:
        flat = to_ints(joined)
    except ValueError as exc:
        raise FeatureError(str(exc)) from None
    return flat.reshape(len(texts), -1).astype(np.int64)


def matrix(texts, kind, length=None):
    """Design matrix for a batch of messages, optionally truncated to `length`."""
    x = _batch(texts)
    if length is not None:
        if length > x.shape[1]:
            raise FeatureError(f"cannot truncate {x.shape[1]}-letter messages to {length}")
        x = x[:, :length]
    n, L = x.shape
    rows = np.arange(n)[:, None]
    if kind == "histogram":
        if L == 0:
            raise FeatureError("histogram of an empty text")
        counts = np.bincount((rows * 26 + x).ravel(), minlength=n * 26).reshape(n, 26)
        return counts / L
    if kind == "digram":
        if L < 2:
            raise FeatureError("digram needs at least two letters")
        codes = rows * 676 + 26 * x[:, :-1] + x[:, 1:]
        counts = np.bincount(codes.ravel(), minlength=n * 676).reshape(n, 676)
        return counts / (L - 1)
    if kind == "sequence":
        if L == 0:
            raise FeatureError("sequence of an empty text")
        return x.astype(np.float64)
    raise FeatureError(f"unknown feature kind {kind!r}")


def write_csv(path, X, labels):
    """Write ``label,f0..f{d-1}`` rows; labels are class indices or cipher names."""
    X = np.asarray(X)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["label"] + [f"f{i}" for i in range(X.shape[1])])
        for label, row in zip(labels, X):
            name = CIPHERS[label] if isinstance(label, (int, np.integer)) else label
            w.writerow([name] + [repr(float(v)) if not float(v).is_integer() else int(v) for v in row])
