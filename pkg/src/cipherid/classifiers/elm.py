"""Extreme learning machine: random fixed hidden layer, ridge output layer."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve

ACTIVATIONS = ("relu", "sigmoid", "tanh")
RIDGE = 1e-6


@dataclass(frozen=True)
class ELMParams:
    hidden_neurons: int = 133
    activation: str = "relu"
    ridge: float = RIDGE

    family = "elm"
    standardize_default = True

    def validate(self):
        if self.hidden_neurons < 1:
            raise ValueError("hidden_neurons must be at least 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


def hidden(X, W, b, activation):
    Z = X @ W + b
    if activation == "relu":
        return np.maximum(Z, 0.0)
    if activation == "tanh":
        return np.tanh(Z)
    return 0.5 * (1.0 + np.tanh(0.5 * Z))   # logistic, overflow-free


def ridge_solve(H, T, lam):
    """argmin ||H b - T||^2 + lam ||b||^2.

    Uses the primal normal equations when H has no more columns than rows,
    otherwise the equivalent dual form ``H^T (H H^T + lam I)^-1 T``.
    """
    n, m = H.shape
    if m <= n:
        return solve(H.T @ H + lam * np.eye(m), H.T @ T, assume_a="pos")
    return H.T @ solve(H @ H.T + lam * np.eye(n), T, assume_a="pos")


def fit(X, y, n_classes, hp, seed=0):
    hp.validate()
    rng = np.random.default_rng(seed)
    W = rng.uniform(-1.0, 1.0, (X.shape[1], hp.hidden_neurons))
    b = rng.uniform(-1.0, 1.0, hp.hidden_neurons)
    H = hidden(X, W, b, hp.activation)
    T = np.eye(n_classes)[y]
    return {"W": W, "b": b, "beta": ridge_solve(H, T, hp.ridge)}


def scores(params, X, hp, n_classes):
    """Raw linear outputs, one column per class."""
    return hidden(X, params["W"], params["b"], hp.activation) @ params["beta"]
