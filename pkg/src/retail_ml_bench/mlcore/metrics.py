from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    macro_f1: float
    confusion: tuple[tuple[int, ...], ...]   # rows = actual, columns = predicted

    @property
    def n(self) -> int:
        return sum(map(sum, self.confusion))


def classification_metrics(predicted: Sequence[int], actual: Sequence[int],
                           n_classes: Optional[int] = None) -> ClassificationMetrics:
    """Accuracy, per-class precision/recall/F1 (0 where undefined) and confusion matrix.

    Macro-F1 averages over the classes that occur in either sequence.
    """
    p = np.asarray(predicted, dtype=np.int64)
    a = np.asarray(actual, dtype=np.int64)
    if len(p) != len(a):
        raise ValueError(f"length mismatch: {len(p)} predictions for {len(a)} labels")
    if len(a) == 0:
        raise ValueError("need at least one label")
    if n_classes is None:
        n_classes = int(max(p.max(), a.max())) + 1
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (a, p), 1)
    tp = np.diag(cm).astype(np.float64)
    pred_tot = cm.sum(axis=0)
    true_tot = cm.sum(axis=1)
    precision = np.divide(tp, pred_tot, out=np.zeros(n_classes), where=pred_tot > 0)
    recall = np.divide(tp, true_tot, out=np.zeros(n_classes), where=true_tot > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(n_classes), where=denom > 0)
    present = (pred_tot + true_tot) > 0
    return ClassificationMetrics(
        accuracy=float(tp.sum() / len(a)),
        precision=tuple(precision.tolist()),
        recall=tuple(recall.tolist()),
        f1=tuple(f1.tolist()),
        macro_f1=float(f1[present].mean()),
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
    )


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2.0


def adjusted_rand_index(labels_a: Sequence[int], labels_b: Sequence[int]) -> float:
    """Chance-corrected Rand index between two partitions of the same items."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if len(a) != len(b):
        raise ValueError("partitions must label the same number of items")
    n = len(a)
    if n < 2:
        return 1.0
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    index = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    expected = sum_a * sum_b / _comb2(n)
    maximum = (sum_a + sum_b) / 2.0
    if maximum == expected:
        # both partitions trivial in the same way (all singletons or one block)
        return 1.0 if index == maximum else 0.0
    return float((index - expected) / (maximum - expected))
