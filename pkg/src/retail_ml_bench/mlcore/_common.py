from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from ..textkit import SparseMatrix

Features = Union[np.ndarray, SparseMatrix, sp.spmatrix]


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class IterConfig:
    max_iter: int = 100
    tol: float = 1e-4
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not self.l2 >= 0:
            raise ValueError("l2 must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def as_matrix(X: Features):
    """Return a float64 ndarray or a CSR matrix."""
    if isinstance(X, SparseMatrix):
        return X.to_scipy()
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    return X


def as_dense(X: Features) -> np.ndarray:
    X = as_matrix(X)
    return X.toarray() if sp.issparse(X) else X


def min_value(X) -> float:
    if sp.issparse(X):
        return float(min(X.data.min(), 0.0)) if X.nnz else 0.0
    return float(X.min()) if X.size else 0.0


def check_dim(X, n_features: int) -> None:
    if X.shape[1] != n_features:
        raise DimensionError(f"feature dimension {X.shape[1]} does not match model dimension {n_features}")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True, eq=False)
class LabeledData:
    features: Features
    labels: np.ndarray
    n_classes: Optional[int] = None

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", y)
        n_rows = self.features.shape[0]
        if len(y) != n_rows:
            raise DimensionError(f"{len(y)} labels for {n_rows} rows")
        if self.n_classes is None:
            object.__setattr__(self, "n_classes", int(y.max()) + 1 if len(y) else 0)
        if len(y) and (y.min() < 0 or y.max() >= self.n_classes):
            raise ValueError(f"labels must lie in [0, {self.n_classes})")

    @classmethod
    def of(cls, features: Features, labels: Sequence[int], n_classes: Optional[int] = None) -> "LabeledData":
        return cls(features, np.asarray(labels), n_classes)

    def matrix(self):
        return as_matrix(self.features)

    def require_classes(self, minimum: int = 1) -> None:
        if len(self.labels) == 0:
            raise ValueError("empty training data")
        present = np.bincount(self.labels, minlength=self.n_classes)
        missing = np.flatnonzero(present == 0)
        if len(missing):
            raise ValueError(f"class {int(missing[0])} absent from training data")
        if self.n_classes < minimum:
            raise ValueError(f"single-class data: need at least {minimum} classes")


def softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def log_softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=1, keepdims=True)
    return Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
