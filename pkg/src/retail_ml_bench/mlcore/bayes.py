from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._common import LabeledData, as_matrix, check_dim, min_value

ALPHA = 1.0


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    class_log_priors: np.ndarray
    feature_log_likelihoods: np.ndarray

    @property
    def n_features(self) -> int:
        return self.feature_log_likelihoods.shape[1]

    def scores(self, features) -> np.ndarray:
        X = as_matrix(features)
        check_dim(X, self.n_features)
        return np.asarray(X @ self.feature_log_likelihoods.T) + self.class_log_priors


def fit_naive_bayes(data: LabeledData, alpha: float = ALPHA) -> NaiveBayesModel:
    """Multinomial naive Bayes with additive (Laplace) smoothing."""
    data.require_classes()
    X = data.matrix()
    if min_value(X) < 0:
        raise ValueError("naive Bayes needs nonnegative features")
    y = data.labels
    n_classes = data.n_classes
    Y = sp.csr_matrix((np.ones(len(y)), (np.arange(len(y)), y)), shape=(len(y), n_classes))
    totals = np.asarray((Y.T @ X).todense() if sp.issparse(X) else Y.T @ X, dtype=np.float64)
    smoothed = totals + alpha
    log_lik = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    log_prior = np.log(np.bincount(y, minlength=n_classes) / len(y))
    return NaiveBayesModel(class_log_priors=log_prior, feature_log_likelihoods=log_lik)
