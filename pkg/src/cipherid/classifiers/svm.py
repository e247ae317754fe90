"""Support vector machine trained by sequential minimal optimization.

Multi-class problems are split one-vs-one; each binary dual

    min  1/2 a^T Q a - e^T a,   Q_ij = y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i y_i a_i = 0

is solved by SMO with second-order working-set selection, stopping when the
maximal KKT violation drops below `tol`.
"""

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

log = logging.getLogger(__name__)

KERNELS = ("linear", "poly", "rbf", "sigmoid")
TAU = 1e-12


@dataclass(frozen=True)
class SVMParams:
    C: float = 1.0
    gamma: float = 0.001
    kernel: str = "rbf"
    degree: int = 3
    coef0: float = 0.0
    tol: float = 1e-3
    max_iter: int = 1_000_000

    family = "svm"
    standardize_default = True

    def validate(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.C <= 0 or self.gamma <= 0:
            raise ValueError("C and gamma must be positive")


def kernel_matrix(A, B, hp):
    """Gram matrix between the rows of A and B."""
    dot = A @ B.T
    if hp.kernel == "linear":
        return dot
    if hp.kernel == "poly":
        return (hp.gamma * dot + hp.coef0) ** hp.degree
    if hp.kernel == "sigmoid":
        return np.tanh(hp.gamma * dot + hp.coef0)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * dot
    return np.exp(-hp.gamma * np.maximum(sq, 0.0))


def smo(K, y, C, tol=1e-3, max_iter=1_000_000):
    """Solve one binary dual on a precomputed kernel.

    `y` holds +1/-1. Returns ``(alpha, rho, iterations)``; the decision
    function is ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    n = y.shape[0]
    y = y.astype(np.float64)
    alpha = np.zeros(n)
    G = -np.ones(n)
    diag = np.diag(K).copy()
    pos = y > 0
    it = 0
    while it < max_iter:
        below_c = alpha < C
        above_0 = alpha > 0
        up = np.where(pos, below_c, above_0)
        low = np.where(pos, above_0, below_c)
        yg = -y * G
        score_up = np.where(up, yg, -np.inf)
        i = int(np.argmax(score_up))
        g_max = score_up[i]
        g_min = np.min(np.where(low, yg, np.inf))
        if g_max - g_min < tol:
            break
        Ki = K[i]
        b = g_max - yg
        a = diag[i] + diag - 2.0 * Ki
        a = np.where(a > 0, a, TAU)
        cand = low & (b > 0)
        j = int(np.argmin(np.where(cand, -(b * b) / a, np.inf)))
        Kj = K[j]

        ai_old, aj_old = alpha[i], alpha[j]
        quad = diag[i] + diag[j] - 2.0 * Ki[j]
        if quad <= 0:
            quad = TAU
        ai, aj = ai_old, aj_old
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        G += y * (y[i] * (ai - ai_old) * Ki + y[j] * (aj - aj_old) * Kj)
        it += 1
    else:
        log.warning("SMO stopped at max_iter=%d before reaching tol=%g", max_iter, tol)

    yg = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = yg[free].mean()
    else:
        # No free vector: rho lies anywhere in [lb, ub]; take the midpoint.
        at_c = alpha >= C
        upper = (pos & ~at_c) | (~pos & at_c)
        ub = yg[upper].min() if upper.any() else np.inf
        lb = yg[~upper].max() if (~upper).any() else -np.inf
        rho = (ub + lb) / 2.0
    return alpha, float(rho), it


def fit(X, y, n_classes, hp, seed=0):
    hp.validate()
    K = kernel_matrix(X, X, hp)
    pairs = list(combinations(range(n_classes), 2))
    coef = np.zeros((len(pairs), X.shape[0]))
    rho = np.zeros(len(pairs))
    for p, (a, b) in enumerate(pairs):
        idx = np.flatnonzero((y == a) | (y == b))
        yb = np.where(y[idx] == a, 1.0, -1.0)
        alpha, rho[p], _ = smo(K[np.ix_(idx, idx)], yb, hp.C, hp.tol, hp.max_iter)
        coef[p, idx] = alpha * yb
    used = np.flatnonzero(np.any(coef != 0, axis=0))
    return {
        "support_vectors": X[used],
        "dual_coef": coef[:, used],
        "rho": rho,
        "pairs": np.array(pairs, dtype=np.int64).reshape(-1, 2),
    }


def decision_function(params, X, hp):
    """Pairwise decision values, shape ``(n, n_pairs)``; positive favours the first class."""
    K = kernel_matrix(X, params["support_vectors"], hp)
    return K @ params["dual_coef"].T - params["rho"][None, :]


def scores(params, X, hp, n_classes):
    """One-vs-one votes plus a bounded margin term that only breaks ties."""
    dec = decision_function(params, X, hp)
    votes = np.zeros((X.shape[0], n_classes))
    conf = np.zeros_like(votes)
    for p, (a, b) in enumerate(params["pairs"]):
        win_a = dec[:, p] >= 0
        votes[:, a] += win_a
        votes[:, b] += ~win_a
        conf[:, a] += dec[:, p]
        conf[:, b] -= dec[:, p]
    return votes + conf / (3.0 * (np.abs(conf) + 1.0))
