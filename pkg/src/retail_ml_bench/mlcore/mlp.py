"""Multilayer perceptron: sigmoid hidden layers, softmax output, full-batch GD."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit, logsumexp

from ._common import IterConfig, LabeledData, as_matrix, check_dim, rng_for

DEFAULT_HIDDEN = (32,)


@dataclass(frozen=True, eq=False)
class MlpModel:
    layer_sizes: tuple[int, ...]
    weights: tuple[np.ndarray, ...]   # weights[l] has shape (layer_sizes[l+1], layer_sizes[l])
    biases: tuple[np.ndarray, ...]
    training_loss_trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (self.layer_sizes[l + 1], self.layer_sizes[l]) or b.shape != (self.layer_sizes[l + 1],):
                raise ValueError(f"layer {l} parameter shapes disagree with layer_sizes")

    @property
    def n_features(self) -> int:
        return self.layer_sizes[0]

    def scores(self, features) -> np.ndarray:
        X = as_matrix(features)
        check_dim(X, self.n_features)
        return _forward(self.weights, self.biases, X)[-1]

    def predict_proba(self, features) -> np.ndarray:
        Z = self.scores(features)
        return np.exp(Z - logsumexp(Z, axis=1, keepdims=True))


def _forward(weights, biases, X):
    """Activations per layer; the last entry holds the output logits."""
    acts = [X]
    h = X
    last = len(weights) - 1
    for l, (W, b) in enumerate(zip(weights, biases)):
        z = np.asarray(h @ W.T) + b
        h = z if l == last else expit(z)
        acts.append(h)
    return acts


def mlp_objective(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], X, y: np.ndarray, l2: float):
    """Mean cross-entropy plus ``l2/2`` times the squared weight norms.

    Returns ``(loss, weight_grads, bias_grads)`` computed by backpropagation.
    """
    n = X.shape[0]
    acts = _forward(weights, biases, X)
    Z = acts[-1]
    lse = logsumexp(Z, axis=1)
    loss = float((lse - Z[np.arange(n), y]).mean())
    loss += 0.5 * l2 * sum(float(np.sum(W * W)) for W in weights)

    delta = np.exp(Z - lse[:, None])
    delta[np.arange(n), y] -= 1.0
    delta /= n
    gW: list[np.ndarray] = [None] * len(weights)  # type: ignore[list-item]
    gb: list[np.ndarray] = [None] * len(weights)  # type: ignore[list-item]
    for l in range(len(weights) - 1, -1, -1):
        gW[l] = np.asarray(acts[l].T @ delta).T + l2 * weights[l]
        gb[l] = delta.sum(axis=0)
        if l:
            h = acts[l]
            delta = (delta @ weights[l]) * h * (1.0 - h)
    return loss, gW, gb


def xavier_init(layer_sizes: Sequence[int], seed: int):
    rng = rng_for(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def fit_mlp(data: LabeledData, hidden: Sequence[int] = DEFAULT_HIDDEN,
            cfg: IterConfig = IterConfig()) -> MlpModel:
    if not hidden or any(h < 1 for h in hidden):
        raise ValueError("hidden must list at least one positive layer width")
    data.require_classes(minimum=2)
    X = as_matrix(data.features)
    y = data.labels
    sizes = (X.shape[1], *(int(h) for h in hidden), data.n_classes)
    weights, biases = xavier_init(sizes, cfg.seed)
    trace: list[float] = []
    for _ in range(cfg.max_iter):
        loss, gW, gb = mlp_objective(weights, biases, X, y, cfg.l2)
        trace.append(loss)
        for l in range(len(weights)):
            weights[l] -= cfg.learning_rate * gW[l]
            biases[l] -= cfg.learning_rate * gb[l]
    return MlpModel(sizes, tuple(weights), tuple(biases), trace)
