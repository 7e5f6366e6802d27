"""From-scratch classification and clustering learners."""
from __future__ import annotations

import numpy as np

from ._common import DimensionError, IterConfig, LabeledData, softmax
from .bayes import NaiveBayesModel, fit_naive_bayes
from .clustering import (GmmModel, KMeansModel, VARIANCE_FLOOR, fit_gmm, fit_kmeans, gmm_assign,
                         gmm_responsibilities, kmeans_assign)
from .linear import LinearModel, fit_linear_svm, fit_logistic, hinge_loss, hinge_objective, logistic_objective
from .metrics import ClassificationMetrics, adjusted_rand_index, classification_metrics
from .mlp import MlpModel, fit_mlp, mlp_objective
from .serialize import model_from_json, model_to_json
from .tree import DecisionTreeModel, fit_decision_tree


def predict(model, features) -> np.ndarray:
    """Class with the highest score for each row; ties go to the lowest class id."""
    return np.argmax(model.scores(features), axis=1)


__all__ = [
    "ClassificationMetrics", "DecisionTreeModel", "DimensionError", "GmmModel", "IterConfig", "KMeansModel",
    "LabeledData", "LinearModel", "MlpModel", "NaiveBayesModel", "VARIANCE_FLOOR", "adjusted_rand_index",
    "classification_metrics", "fit_decision_tree", "fit_gmm", "fit_kmeans", "fit_linear_svm", "fit_logistic",
    "fit_mlp", "fit_naive_bayes", "gmm_assign", "gmm_responsibilities", "hinge_loss", "hinge_objective",
    "kmeans_assign", "logistic_objective", "mlp_objective", "model_from_json", "model_to_json", "predict",
    "softmax",
]
