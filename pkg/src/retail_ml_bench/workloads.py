"""The five end-to-end pipelines: a data-preparation stage followed by an ML stage.

Each ``*_run`` function returns prep and ML wall-clock seconds, a numeric
quality record and a JSON-friendly artifact summary.  Learners never see the
generator's latent columns (segment ids, bundle ids, word pools); those are
used only to score the output.
"""
from __future__ import annotations

import hashlib
import json
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import fpm, mlcore, topics
from .datagen import RetailDataset, sentiment_of, word_pools
from .mlcore import IterConfig, LabeledData
from .textkit import build_vocabulary, tfidf, tokenize

WORKLOADS = ("Q26", "Q28", "M1", "M2", "M3")
ALGORITHMS: dict[str, tuple[str, ...]] = {
    "Q26": ("kmeans", "gmm"),
    "Q28": ("naive_bayes", "logistic", "svm"),
    "M1": ("fp_growth", "eclat", "pairs_baseline"),
    "M2": ("lda",),
    "M3": ("decision_tree", "mlp", "svm", "naive_bayes", "logistic"),
}

TRAIN_PERCENT = 80
M2_DEFAULT_ALPHA = 0.1
# unit-norm tf-idf rows spread over many terms need a larger step than the generic default
Q28_DEFAULT_LEARNING_RATE = 1.0
POOL_TOP_N = 10
REPORT_TOP_N = 20


class WorkloadError(ValueError):
    """The prepared data cannot feed the requested ML stage."""


@dataclass(frozen=True)
class WorkloadSpec:
    workload: str
    algorithm: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 42

    def __post_init__(self):
        wl = str(self.workload).upper()
        if wl not in ALGORITHMS:
            raise ValueError(f"unknown workload {self.workload!r}; expected one of {', '.join(WORKLOADS)}")
        object.__setattr__(self, "workload", wl)
        algo = str(self.algorithm).lower()
        if algo not in ALGORITHMS[wl]:
            raise ValueError(f"algorithm {self.algorithm!r} is not valid for {wl}; "
                             f"expected one of {', '.join(ALGORITHMS[wl])}")
        object.__setattr__(self, "algorithm", algo)
        object.__setattr__(self, "params", dict(self.params))

    def param(self, name: str, default):
        return self.params.get(name, default)


@dataclass
class WorkloadOutput:
    prep_seconds: float
    ml_seconds: float
    quality: dict[str, float]
    artifacts: dict[str, Any]


def train_split(key: str, seed: int) -> bool:
    """Stable 80/20 assignment from a hash of the row key and the seed."""
    h = hashlib.blake2b(f"{key}|{seed}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little") % 100 < TRAIN_PERCENT


def iter_config(spec: WorkloadSpec) -> IterConfig:
    d = IterConfig()
    lr = Q28_DEFAULT_LEARNING_RATE if spec.workload == "Q28" else d.learning_rate
    return IterConfig(max_iter=int(spec.param("max_iter", d.max_iter)), tol=float(spec.param("tol", d.tol)),
                      learning_rate=float(spec.param("learning_rate", lr)),
                      l2=float(spec.param("l2", d.l2)), seed=int(spec.seed))


def fit_classifier(spec: WorkloadSpec, data: LabeledData):
    algo = spec.algorithm
    cfg = iter_config(spec)
    if algo == "naive_bayes":
        return mlcore.fit_naive_bayes(data)
    if algo == "logistic":
        return mlcore.fit_logistic(data, cfg)
    if algo == "svm":
        return mlcore.fit_linear_svm(data, cfg, batch_size=int(spec.param("batch_size", mlcore.linear.SVM_BATCH_SIZE)))
    if algo == "decision_tree":
        depth = spec.param("max_depth", 10)
        return mlcore.fit_decision_tree(data, None if depth is None else int(depth),
                                        int(spec.param("min_samples_split", 2)))
    if algo == "mlp":
        hidden = spec.param("hidden", [32])
        if isinstance(hidden, int):
            hidden = [hidden]
        return mlcore.fit_mlp(data, [int(h) for h in hidden], cfg)
    raise ValueError(f"{algo} is not a classifier")


def _timed(fn: Callable, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


# --------------------------------------------------------------------------- Q26

def q26_features(ds: RetailDataset, mode: str = "counts"):
    """Per-customer store-channel book purchases by book category.

    Returns ``(customer_ids, matrix)``; customers without any such purchase
    are left out.
    """
    if mode not in ("counts", "spend"):
        raise ValueError(f"features must be 'counts' or 'spend', got {mode!r}")
    products = ds.products
    feats: dict[int, np.ndarray] = {}
    width = ds.n_book_categories
    for s in ds.sales:
        if s.channel != "store":
            continue
        p = products[s.product_id]
        if not p.is_book:
            continue
        row = feats.get(s.customer_id)
        if row is None:
            row = feats[s.customer_id] = np.zeros(width)
        row[p.book_category_id] += 1.0 if mode == "counts" else s.quantity * p.unit_price
    ids = sorted(feats)
    X = np.array([feats[c] for c in ids]) if ids else np.zeros((0, width))
    return ids, X


def q26_run(ds: RetailDataset, spec: WorkloadSpec) -> WorkloadOutput:
    if spec.workload != "Q26":
        raise ValueError("q26_run needs a Q26 spec")
    (ids, X), prep = _timed(q26_features, ds, spec.param("features", "counts"))
    if not ids:
        raise WorkloadError("no customer bought a book in a physical store")
    k = int(spec.param("k", 8))
    cfg = iter_config(spec)

    def ml():
        if spec.algorithm == "kmeans":
            model = mlcore.fit_kmeans(X, k, cfg)
            return model, mlcore.kmeans_assign(model, X)
        model = mlcore.fit_gmm(X, k, cfg)
        return model, mlcore.gmm_assign(model, X)

    (model, assign), ml_s = _timed(ml)
    truth = [ds.customers[c].segment_id for c in ids]
    quality = {"n_customers": float(len(ids)), "ari": mlcore.adjusted_rand_index(assign, truth)}
    if spec.algorithm == "kmeans":
        quality["inertia"] = model.inertia
    else:
        quality["log_likelihood"] = model.final_log_likelihood
    sizes = np.bincount(assign, minlength=k)
    artifacts = {"cluster_sizes": sizes.tolist(),
                 "assignments": {str(c): int(a) for c, a in zip(ids, assign)}}
    return WorkloadOutput(prep, ml_s, quality, artifacts)


# --------------------------------------------------------------------------- Q28

def q28_prepare(ds: RetailDataset, spec: WorkloadSpec):
    binary = bool(spec.param("binary", False))
    rows = []
    for r in ds.reviews:
        label = sentiment_of(r.rating)
        if binary:
            if label == 1:
                continue
            label = label // 2
        rows.append((r, label))
    n_classes = 2 if binary else 3
    train = [(tokenize(r.text), y) for r, y in rows if train_split(f"review:{r.id}", spec.seed)]
    test = [(tokenize(r.text), y) for r, y in rows if not train_split(f"review:{r.id}", spec.seed)]
    if not train or not test:
        raise WorkloadError("train/test split left one side empty")
    y_train = np.array([y for _, y in train])
    missing = set(range(n_classes)) - set(y_train.tolist())
    if missing:
        raise WorkloadError(f"class {min(missing)} absent from the training split")
    vocab = build_vocabulary([t for t, _ in train], int(spec.param("min_df", 2)),
                             int(spec.param("max_terms", 50000)))
    X_train = tfidf([t for t, _ in train], vocab)
    X_test = tfidf([t for t, _ in test], vocab)
    return (LabeledData(X_train, y_train, n_classes),
            LabeledData(X_test, np.array([y for _, y in test]), n_classes), vocab)


def _classify(spec: WorkloadSpec, train: LabeledData, test: LabeledData):
    model = fit_classifier(spec, train)
    return model, mlcore.predict(model, test.features)


def q28_run(ds: RetailDataset, spec: WorkloadSpec) -> WorkloadOutput:
    if spec.workload != "Q28":
        raise ValueError("q28_run needs a Q28 spec")
    (train, test, vocab), prep = _timed(q28_prepare, ds, spec)
    (_, pred), ml_s = _timed(_classify, spec, train, test)
    m = mlcore.classification_metrics(pred, test.labels, train.n_classes)
    counts = np.bincount(test.labels, minlength=train.n_classes)
    quality = {"accuracy": m.accuracy, "macro_f1": m.macro_f1,
               "majority_baseline": float(counts.max() / counts.sum()),
               "n_train": float(len(train.labels)), "n_test": float(len(test.labels)),
               "vocabulary_size": float(len(vocab))}
    return WorkloadOutput(prep, ml_s, quality, {"confusion_matrix": [list(r) for r in m.confusion]})


# --------------------------------------------------------------------------- M1

def m1_baskets(ds: RetailDataset) -> fpm.TransactionDB:
    """Sale lines grouped by (customer, day) with duplicate items removed."""
    baskets: dict[tuple[int, int], set[int]] = defaultdict(set)
    for s in ds.sales:
        baskets[(s.customer_id, s.day)].add(s.product_id)
    return fpm.TransactionDB.from_baskets((baskets[k] for k in sorted(baskets)), n_items=len(ds.products))


def m1_mine(db: fpm.TransactionDB, spec: WorkloadSpec):
    min_support = spec.param("min_support", 0.01)
    min_size = int(spec.param("min_size", 3))
    min_conf = spec.param("min_confidence", 0.5)
    if spec.algorithm == "pairs_baseline":
        pairs = fpm.frequent_pairs_baseline(db, min_support)
        singles = Counter(i for t in db.transactions for i in t)
        lookup = [fpm.Itemset((i,), c, len(db)) for i, c in sorted(singles.items())] + pairs
        reported = pairs
        rules = [r for r in fpm.association_rules(lookup, len(db), min_conf)]
        return reported, rules
    miner = fpm.fp_growth if spec.algorithm == "fp_growth" else fpm.eclat
    found = miner(db, min_support)
    reported = [s for s in found if len(s) >= min_size]
    rules = [r for r in fpm.association_rules(found, len(db), min_conf)
             if len(r.antecedent) + len(r.consequent) >= min_size]
    return reported, rules


def m1_run(ds: RetailDataset, spec: WorkloadSpec) -> WorkloadOutput:
    if spec.workload != "M1":
        raise ValueError("m1_run needs an M1 spec")
    db, prep = _timed(m1_baskets, ds)
    if len(db) == 0:
        raise WorkloadError("no baskets to mine")
    (itemsets, rules), ml_s = _timed(m1_mine, db, spec)
    found = {s.items for s in itemsets}
    bundles = ds.bundles()
    recall = sum(b in found for b in bundles) / len(bundles) if bundles else 0.0
    quality = {"n_baskets": float(len(db)), "n_itemsets": float(len(itemsets)),
               "n_rules": float(len(rules)), "bundle_recall": float(recall)}
    artifacts = {
        "itemsets": [[list(s.items), s.support_count] for s in itemsets],
        "rules": [{"antecedent": list(r.antecedent), "consequent": list(r.consequent),
                   "support": str(r.support), "confidence": str(r.confidence), "lift": str(r.lift)}
                  for r in rules],
    }
    return WorkloadOutput(prep, ml_s, quality, artifacts)


# --------------------------------------------------------------------------- M2

def pool_matching(top_terms: list[list[str]], pools, n: int = POOL_TOP_N) -> list[float]:
    """Overlap share of each topic's top-``n`` terms with its matched word pool.

    Topics and pools are paired one-to-one to maximise total overlap; topics
    left without a pool score 0.
    """
    pool_sets = [set(p) for p in pools]
    overlap = np.array([[len(set(t[:n]) & p) for p in pool_sets] for t in top_terms])
    rows, cols = linear_sum_assignment(-overlap)
    scores = [0.0] * len(top_terms)
    for r, c in zip(rows, cols):
        scores[r] = overlap[r, c] / n
    return scores


def m2_prepare(ds: RetailDataset, spec: WorkloadSpec):
    docs = [tokenize(r.text) for r in ds.reviews]
    if not any(docs):
        raise WorkloadError("empty corpus")
    vocab = build_vocabulary(docs, int(spec.param("min_df", 2)), int(spec.param("max_terms", 50000)))
    return vocab, [vocab.encode(d) for d in docs]


def m2_run(ds: RetailDataset, spec: WorkloadSpec) -> WorkloadOutput:
    if spec.workload != "M2":
        raise ValueError("m2_run needs an M2 spec")
    (vocab, encoded), prep = _timed(m2_prepare, ds, spec)
    cfg = topics.LdaConfig(k=int(spec.param("k", 3)), alpha=float(spec.param("alpha", M2_DEFAULT_ALPHA)),
                           beta=float(spec.param("beta", 0.01)),
                           iterations=int(spec.param("iterations", 200)), seed=int(spec.seed))
    model, ml_s = _timed(topics.lda_fit, encoded, len(vocab), cfg)
    top = [[vocab.terms[i] for i in row] for row in topics.lda_top_terms(model, min(REPORT_TOP_N, len(vocab)))]
    scores = pool_matching(top, word_pools()[0])
    quality = {"perplexity": topics.lda_perplexity(model, encoded),
               "pool_match_min": float(min(scores)), "pool_match_mean": float(np.mean(scores)),
               "vocabulary_size": float(len(vocab))}
    return WorkloadOutput(prep, ml_s, quality, {"top_terms": top, "pool_match": scores})


# --------------------------------------------------------------------------- M3

M3_FEATURES = ("clicks", "distinct_items", "distinct_sessions", "user_clicks", "category_share")


def m3_prepare(ds: RetailDataset, label_mean: str = "pair"):
    """Features from the first half of the click stream, labels from the second.

    The stream is cut at the timestamp of its middle event: earlier events
    feed the features, the rest feed the label.  Returns ``(keys, X, y)``
    with one row per (user, category) pair clicked in the first half.
    """
    if label_mean not in ("pair", "category", "user"):
        raise ValueError(f"label_mean must be pair, category or user, got {label_mean!r}")
    events = ds.weblog
    if not events:
        raise WorkloadError("empty click stream")
    cut = events[len(events) // 2].ts
    clicks: Counter[tuple[int, int]] = Counter()
    items: dict[tuple[int, int], set] = defaultdict(set)
    sessions: dict[tuple[int, int], set] = defaultdict(set)
    user_total: Counter[int] = Counter()
    later: Counter[tuple[int, int]] = Counter()
    for e in events:
        key = (e.user_id, e.category_id)
        if e.ts < cut:
            clicks[key] += 1
            items[key].add(e.item_id)
            sessions[key].add(e.session_id)
            user_total[e.user_id] += 1
        else:
            later[key] += 1

    threshold = label_thresholds(later, label_mean)
    keys = sorted(clicks)
    X = np.array([[clicks[k], len(items[k]), len(sessions[k]), user_total[k[0]],
                   clicks[k] / user_total[k[0]]] for k in keys], dtype=np.float64).reshape(-1, len(M3_FEATURES))
    y = np.array([int(later.get(k, 0) > threshold(k)) for k in keys], dtype=np.int64)
    return keys, X, y


def label_thresholds(later: Mapping[tuple[int, int], int], label_mean: str) -> Callable:
    """Mean second-half clicks used as the interest threshold for a pair."""
    if not later:
        return lambda key: 0.0
    if label_mean == "pair":
        mean = sum(later.values()) / len(later)
        return lambda key: mean
    slot = 1 if label_mean == "category" else 0
    sums: Counter = Counter()
    counts: Counter = Counter()
    for k, v in later.items():
        sums[k[slot]] += v
        counts[k[slot]] += 1
    return lambda key: sums[key[slot]] / counts[key[slot]] if counts[key[slot]] else 0.0


def _standardize(X_train: np.ndarray, X_test: np.ndarray):
    mu = X_train.mean(axis=0)
    sd = X_train.std(axis=0)
    sd[sd == 0] = 1.0
    return (X_train - mu) / sd, (X_test - mu) / sd


def m3_run(ds: RetailDataset, spec: WorkloadSpec) -> WorkloadOutput:
    if spec.workload != "M3":
        raise ValueError("m3_run needs an M3 spec")

    def prep():
        keys, X, y = m3_prepare(ds, spec.param("label_mean", "pair"))
        if len(set(y.tolist())) < 2:
            raise WorkloadError("fewer than 2 distinct labels after preparation")
        mask = np.array([train_split(f"pair:{u}:{c}", spec.seed) for u, c in keys], dtype=bool)
        X_tr, X_te = X[mask], X[~mask]
        if spec.algorithm in ("logistic", "svm", "mlp"):
            X_tr, X_te = _standardize(X_tr, X_te)
        if len(set(y[mask].tolist())) < 2:
            raise WorkloadError("a label is absent from the training split")
        return LabeledData(X_tr, y[mask], 2), LabeledData(X_te, y[~mask], 2), y

    (train, test, y_all), prep_s = _timed(prep)
    (_, pred), ml_s = _timed(_classify, spec, train, test)
    m = mlcore.classification_metrics(pred, test.labels, 2)
    share = float(y_all.mean())
    counts = np.bincount(test.labels, minlength=2)
    quality = {"accuracy": m.accuracy, "macro_f1": m.macro_f1, "label_balance": share,
               "minority_share": min(share, 1.0 - share),
               "majority_baseline": float(counts.max() / max(1, counts.sum())),
               "n_rows": float(len(y_all))}
    return WorkloadOutput(prep_s, ml_s, quality, {"confusion_matrix": [list(r) for r in m.confusion],
                                                  "label_counts": np.bincount(y_all, minlength=2).tolist()})


# --------------------------------------------------------------------------- dispatch

RUNNERS: dict[str, Callable[[RetailDataset, WorkloadSpec], WorkloadOutput]] = {
    "Q26": q26_run, "Q28": q28_run, "M1": m1_run, "M2": m2_run, "M3": m3_run,
}


def run_workload(ds: RetailDataset, spec: WorkloadSpec) -> WorkloadOutput:
    return RUNNERS[spec.workload](ds, spec)


def write_artifacts(spec: WorkloadSpec, output: WorkloadOutput, directory: Path, sf: Optional[float] = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    suffix = "" if sf is None else f"_sf{sf:g}"
    path = directory / f"{spec.workload}_{spec.algorithm}{suffix}.json"
    doc = {"workload": spec.workload, "algorithm": spec.algorithm, "params": spec.params, "seed": spec.seed,
           "sf": sf, "quality": output.quality, "artifacts": output.artifacts}
    path.write_text(json.dumps(doc, indent=1, sort_keys=True, default=str) + "\n", encoding="utf-8")
    return path
