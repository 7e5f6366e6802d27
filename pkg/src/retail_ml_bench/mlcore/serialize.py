"""Versioned JSON form of fitted models, for debugging and inspection only."""
from __future__ import annotations

import dataclasses
import json

import numpy as np

from .bayes import NaiveBayesModel
from .clustering import GmmModel, KMeansModel
from .linear import LinearModel
from .mlp import MlpModel
from .tree import DecisionTreeModel

FORMAT = "retail_ml_bench.model"
VERSION = 1

_TYPES = {cls.__name__: cls for cls in
          (KMeansModel, GmmModel, NaiveBayesModel, LinearModel, DecisionTreeModel, MlpModel)}


def _encode(v):
    if isinstance(v, np.ndarray):
        return {"__ndarray__": v.tolist(), "dtype": str(v.dtype)}
    if isinstance(v, tuple) and v and isinstance(v[0], np.ndarray):
        return [_encode(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, tuple):
        return list(v)
    return v


def _decode(v):
    if isinstance(v, dict) and "__ndarray__" in v:
        return np.array(v["__ndarray__"], dtype=v["dtype"])
    if isinstance(v, list) and v and isinstance(v[0], dict) and "__ndarray__" in v[0]:
        return tuple(_decode(x) for x in v)
    return v


def model_to_json(model) -> str:
    name = type(model).__name__
    if name not in _TYPES:
        raise TypeError(f"cannot serialise {name}")
    body = {f.name: _encode(getattr(model, f.name)) for f in dataclasses.fields(model)}
    return json.dumps({"format": FORMAT, "version": VERSION, "type": name, "model": body})


def model_from_json(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise ValueError("unsupported model document")
    cls = _TYPES[doc["type"]]
    kwargs = {k: _decode(v) for k, v in doc["model"].items()}
    if cls is MlpModel:
        kwargs["layer_sizes"] = tuple(kwargs["layer_sizes"])
    return cls(**kwargs)
