"""Multi-layer perceptron with softmax output and cross-entropy loss."""

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "tanh")
SOLVERS = ("adam", "sgd")


class DivergenceError(ArithmeticError):
    def __init__(self, epoch, loss):
        super().__init__(f"training diverged at epoch {epoch}: loss = {loss}")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class MLPParams:
    hidden_layout: tuple = (500,)
    activation: str = "relu"
    alpha: float = 1e-4
    max_iter: int = 200
    solver: str = "adam"
    batch_size: int = 200
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    family = "mlp"
    standardize_default = True

    def __post_init__(self):
        object.__setattr__(self, "hidden_layout", tuple(int(h) for h in self.hidden_layout))

    def validate(self):
        if not self.hidden_layout or min(self.hidden_layout) < 1:
            raise ValueError("hidden_layout must be a nonempty tuple of positive sizes")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.max_iter < 1 or self.batch_size < 1:
            raise ValueError("max_iter and batch_size must be positive")


def _act(z, name):
    return np.maximum(z, 0.0) if name == "relu" else np.tanh(z)


def _act_grad(a, name):
    """Derivative expressed through the activation output."""
    return (a > 0).astype(a.dtype) if name == "relu" else 1.0 - a * a


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(weights, X, activation):
    """Activations of every layer; the last entry holds class probabilities."""
    acts = [X]
    for W, b in weights[:-1]:
        acts.append(_act(acts[-1] @ W + b, activation))
    W, b = weights[-1]
    acts.append(softmax(acts[-1] @ W + b))
    return acts


def loss_and_grad(weights, X, T, alpha, activation):
    """Mean cross-entropy plus ``alpha / (2 n) * sum ||W||^2`` and its gradient.

    `weights` is a list of ``(W, b)`` pairs and `T` one-hot targets.
    """
    n = X.shape[0]
    acts = forward(weights, X, activation)
    P = acts[-1]
    loss = -np.sum(T * np.log(np.clip(P, 1e-300, None))) / n
    loss += alpha / (2.0 * n) * sum(float(np.sum(W * W)) for W, _ in weights)
    grads = [None] * len(weights)
    delta = (P - T) / n
    for layer in range(len(weights) - 1, -1, -1):
        W, _ = weights[layer]
        grads[layer] = (acts[layer].T @ delta + (alpha / n) * W, delta.sum(axis=0))
        if layer:
            delta = (delta @ W.T) * _act_grad(acts[layer], activation)
    return loss, grads


def init_weights(sizes, rng):
    """Glorot-uniform weights and biases."""
    weights = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append((rng.uniform(-bound, bound, (fan_in, fan_out)),
                        rng.uniform(-bound, bound, fan_out)))
    return weights


def fit(X, y, n_classes, hp, seed=0):
    """Train for exactly `max_iter` epochs of shuffled mini-batches."""
    hp.validate()
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    T = np.eye(n_classes)[y]
    weights = init_weights([X.shape[1], *hp.hidden_layout, n_classes], rng)
    flat = [a for wb in weights for a in wb]
    m = [np.zeros_like(a) for a in flat]
    v = [np.zeros_like(a) for a in flat]
    step = 0
    losses = np.empty(hp.max_iter)
    for epoch in range(hp.max_iter):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, hp.batch_size):
            batch = order[start:start + hp.batch_size]
            loss, grads = loss_and_grad(weights, X[batch], T[batch], hp.alpha, hp.activation)
            if not np.isfinite(loss):
                raise DivergenceError(epoch + 1, loss)
            total += loss * batch.size
            step += 1
            g = [a for wb in grads for a in wb]
            if hp.solver == "adam":
                lr = hp.learning_rate * np.sqrt(1 - hp.beta2 ** step) / (1 - hp.beta1 ** step)
                for k, gk in enumerate(g):
                    m[k] *= hp.beta1
                    m[k] += (1 - hp.beta1) * gk
                    v[k] *= hp.beta2
                    v[k] += (1 - hp.beta2) * gk * gk
                    flat[k] -= lr * m[k] / (np.sqrt(v[k]) + hp.epsilon)
            else:
                for k, gk in enumerate(g):
                    flat[k] -= hp.learning_rate * gk
        losses[epoch] = total / n
        if not np.isfinite(losses[epoch]):
            raise DivergenceError(epoch + 1, losses[epoch])
    params = {"loss_curve": losses}
    for k, a in enumerate(flat):
        params[f"{'W' if k % 2 == 0 else 'b'}{k // 2}"] = a
    return params


def _weights(params):
    layers = sum(1 for k in params if k.startswith("W"))
    return [(params[f"W{i}"], params[f"b{i}"]) for i in range(layers)]


def scores(params, X, hp, n_classes):
    """Softmax class probabilities."""
    return forward(_weights(params), X, hp.activation)[-1]
