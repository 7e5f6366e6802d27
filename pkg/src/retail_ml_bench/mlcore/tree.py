"""CART classification tree with Gini impurity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._common import LabeledData, as_dense, check_dim

_EPS = 1e-12
LEAF = -1


@dataclass(frozen=True, eq=False)
class DecisionTreeModel:
    """Flat node arrays; node 0 is the root.

    Internal nodes have ``feature >= 0`` and route ``x[feature] <= threshold``
    to ``left``.  Leaves have ``feature == -1`` and carry ``value``.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    impurity_decrease: np.ndarray
    n_features: int
    n_classes: int
    max_depth: Optional[int]

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] != LEAF:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def apply(self, features) -> np.ndarray:
        """Leaf index reached by every row."""
        X = as_dense(features)
        check_dim(X, self.n_features)
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            inner = f != LEAF
            if not inner.any():
                return node
            r, n = rows[inner], node[inner]
            go_left = X[r, f[inner]] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])

    def scores(self, features) -> np.ndarray:
        leaves = self.apply(features)
        S = np.zeros((len(leaves), self.n_classes))
        S[np.arange(len(leaves)), self.value[leaves]] = 1.0
        return S


def _gini(counts: np.ndarray, n: int) -> float:
    return 1.0 - float((counts.astype(np.float64) ** 2).sum()) / (n * n)


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int):
    n = len(y)
    parent = _gini(np.bincount(y, minlength=n_classes), n)
    onehot = np.eye(n_classes, dtype=np.float64)
    best = None  # (decrease, feature, threshold)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cand = np.flatnonzero(xs[:-1] < xs[1:])
        if len(cand) == 0:
            continue
        left = np.cumsum(onehot[y[order]], axis=0)[cand]
        right = np.bincount(y, minlength=n_classes) - left
        n_left = (cand + 1).astype(np.float64)
        n_right = n - n_left
        weighted = (n_left - (left ** 2).sum(axis=1) / n_left + n_right - (right ** 2).sum(axis=1) / n_right) / n
        dec = parent - weighted
        top = dec.max()
        j = int(np.flatnonzero(dec >= top - _EPS)[0])
        if best is None or dec[j] > best[0] + _EPS:
            lo, hi = xs[cand[j]], xs[cand[j] + 1]
            thr = lo + (hi - lo) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best = (float(dec[j]), f, float(thr))
    return best


def fit_decision_tree(data: LabeledData, max_depth: Optional[int] = 10,
                      min_samples_split: int = 2) -> DecisionTreeModel:
    """Grow a CART tree.

    Splits maximise Gini decrease over midpoints of consecutive distinct
    values; ties prefer the lowest feature index, then the lowest threshold.
    A node becomes a leaf when pure, at ``max_depth`` (``None`` = unbounded),
    when it holds fewer than ``min_samples_split`` rows, or when no split
    lowers impurity.  Leaves predict the majority class (lowest id on ties).
    """
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    X = as_dense(data.features)
    y = data.labels
    if len(y) == 0:
        raise ValueError("empty training data")
    n_classes = data.n_classes

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[int] = []
    decrease: list[float] = []

    def new_node() -> int:
        for a, v in ((feature, LEAF), (threshold, 0.0), (left, -1), (right, -1), (value, 0), (decrease, 0.0)):
            a.append(v)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, rows, depth = stack.pop()
        ys = y[rows]
        counts = np.bincount(ys, minlength=n_classes)
        value[node] = int(np.argmax(counts))
        if (counts.max() == len(rows) or (max_depth is not None and depth >= max_depth)
                or len(rows) < min_samples_split):
            continue
        split = _best_split(X[rows], ys, n_classes)
        if split is None or split[0] <= _EPS:
            continue
        dec, f, thr = split
        go_left = X[rows, f] <= thr
        lnode, rnode = new_node(), new_node()
        feature[node], threshold[node], left[node], right[node], decrease[node] = f, thr, lnode, rnode, dec
        stack.append((rnode, rows[~go_left], depth + 1))
        stack.append((lnode, rows[go_left], depth + 1))

    return DecisionTreeModel(
        feature=np.array(feature, dtype=np.int64), threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64), right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.int64), impurity_decrease=np.array(decrease),
        n_features=X.shape[1], n_classes=n_classes, max_depth=max_depth)
