"""Softmax logistic regression and linear SVMs trained by (sub)gradient descent."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ._common import IterConfig, LabeledData, as_matrix, check_dim, rng_for, softmax

LOSS_CHANGE_STOP = 1e-8
SVM_BATCH_SIZE = 64


@dataclass(frozen=True, eq=False)
class LinearModel:
    kind: str  # "logistic" or "svm"
    weights: np.ndarray
    bias: np.ndarray
    n_classes: int
    training_loss_trace: list[float] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def scores(self, features) -> np.ndarray:
        X = as_matrix(features)
        check_dim(X, self.n_features)
        S = np.asarray(X @ self.weights.T) + self.bias
        if self.kind == "svm" and self.n_classes == 2 and self.weights.shape[0] == 1:
            return np.hstack([-S, S])
        return S


def _xt_dot(X, G):
    """X^T G for dense or CSR X, always returned as an ndarray."""
    return np.asarray(X.T @ G)


def logistic_objective(W: np.ndarray, b: np.ndarray, X, y: np.ndarray, l2: float):
    """Mean softmax cross-entropy plus ``l2/2 * ||W||^2`` and its gradient.

    Returns ``(loss, grad_W, grad_b)``; the bias is not penalised.
    """
    n = X.shape[0]
    Z = np.asarray(X @ W.T) + b
    lse = logsumexp(Z, axis=1)
    loss = float((lse - Z[np.arange(n), y]).mean() + 0.5 * l2 * np.sum(W * W))
    P = np.exp(Z - lse[:, None])
    P[np.arange(n), y] -= 1.0
    P /= n
    return loss, _xt_dot(X, P).T + l2 * W, P.sum(axis=0)


def fit_logistic(data: LabeledData, cfg: IterConfig = IterConfig()) -> LinearModel:
    data.require_classes(minimum=2)
    X = data.matrix()
    y = data.labels
    C, d = data.n_classes, X.shape[1]
    W = np.zeros((C, d))
    b = np.zeros(C)
    trace: list[float] = []
    for _ in range(cfg.max_iter):
        loss, gW, gb = logistic_objective(W, b, X, y, cfg.l2)
        trace.append(loss)
        if len(trace) > 1 and abs(trace[-2] - loss) < LOSS_CHANGE_STOP:
            break
        W -= cfg.learning_rate * gW
        b -= cfg.learning_rate * gb
    return LinearModel("logistic", W, b, C, trace)


def hinge_objective(w: np.ndarray, b: float, X, y_pm: np.ndarray, l2: float):
    """``l2/2 * ||w||^2 + mean(max(0, 1 - y (Xw + b)))`` and a subgradient.

    ``y_pm`` holds +1/-1 targets.  Returns ``(loss, grad_w, grad_b)``.
    """
    n = X.shape[0]
    margin = y_pm * (np.asarray(X @ w).ravel() + b)
    active = margin < 1.0
    loss = float(np.maximum(0.0, 1.0 - margin).mean() + 0.5 * l2 * np.dot(w, w))
    coef = np.where(active, -y_pm, 0.0) / n
    return loss, _xt_dot(X, coef).ravel() + l2 * w, float(coef.sum())


def _train_binary_svm(X, y_pm, cfg: IterConfig, batch_size: int):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    rng = rng_for(cfg.seed)
    trace = []
    for epoch in range(1, cfg.max_iter + 1):
        step = cfg.learning_rate / np.sqrt(epoch)
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            _, gw, gb = hinge_objective(w, b, X[idx], y_pm[idx], cfg.l2)
            w -= step * gw
            b -= step * gb
        trace.append(hinge_objective(w, b, X, y_pm, cfg.l2)[0])
    return w, b, trace


def fit_linear_svm(data: LabeledData, cfg: IterConfig = IterConfig(),
                   batch_size: int = SVM_BATCH_SIZE, force_ovr: bool = False) -> LinearModel:
    """L2-regularised hinge loss; one-vs-rest when there are more than two classes.

    Each epoch visits a seeded permutation of the rows in mini-batches with
    step ``learning_rate / sqrt(epoch)``.  Two-class problems train a single
    machine for class 1 unless ``force_ovr`` asks for both machines.
    """
    data.require_classes(minimum=2)
    X = data.matrix()
    y = data.labels
    C = data.n_classes
    targets = [1] if C == 2 and not force_ovr else list(range(C))
    W = np.zeros((len(targets), X.shape[1]))
    b = np.zeros(len(targets))
    traces = []
    for row, c in enumerate(targets):
        y_pm = np.where(y == c, 1.0, -1.0)
        W[row], b[row], tr = _train_binary_svm(X, y_pm, cfg, batch_size)
        traces.append(tr)
    trace = [float(v) for v in np.mean(np.array(traces), axis=0)]
    return LinearModel("svm", W, b, C, trace)


def hinge_loss(model: LinearModel, features, labels) -> float:
    """Mean hinge loss (no penalty) of a binary SVM model on ``features``."""
    X = as_matrix(features)
    y = np.asarray(labels)
    S = model.scores(X)
    if model.weights.shape[0] == 1:
        margin = np.where(y == 1, 1.0, -1.0) * S[:, 1]
        return float(np.maximum(0.0, 1.0 - margin).mean())
    total = 0.0
    for c in range(model.n_classes):
        margin = np.where(y == c, 1.0, -1.0) * S[:, c]
        total += float(np.maximum(0.0, 1.0 - margin).mean())
    return total / model.n_classes


def class_probabilities(model: LinearModel, features) -> np.ndarray:
    if model.kind != "logistic":
        raise ValueError("probabilities are only defined for logistic models")
    return softmax(model.scores(features))
