"""Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.

Sampling order is fixed (documents in index order, tokens in position order)
and every uniform draw comes from a seeded PCG64 stream, so a fit is fully
reproducible.  The sweep itself is compiled with numba; uniforms are drawn in
numpy beforehand, one per token per sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numba
import numpy as np


@dataclass(frozen=True)
class LdaConfig:
    k: int = 3
    alpha: Optional[float] = None   # None means 50 / k
    beta: float = 0.01
    iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 50.0 / self.k)
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass(frozen=True, eq=False)
class LdaModel:
    topic_term: np.ndarray          # k x V, rows sum to one
    doc_topic: np.ndarray           # D x k, rows sum to one
    log_likelihood_trace: list[float]
    assignments: list[np.ndarray] = field(repr=False)

    @property
    def k(self) -> int:
        return self.topic_term.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.topic_term.shape[1]


@numba.njit(cache=True)
def _sweep(doc_ptr, words, z, ndt, ntw, nt, alpha, beta, uniforms):  # pragma: no cover - compiled
    k = ntw.shape[0]
    vbeta = ntw.shape[1] * beta
    p = np.empty(k)
    for d in range(doc_ptr.shape[0] - 1):
        for pos in range(doc_ptr[d], doc_ptr[d + 1]):
            w = words[pos]
            t = z[pos]
            ndt[d, t] -= 1
            ntw[t, w] -= 1
            nt[t] -= 1
            total = 0.0
            for j in range(k):
                total += (ndt[d, j] + alpha) * (ntw[j, w] + beta) / (nt[j] + vbeta)
                p[j] = total
            u = uniforms[pos] * total
            t = k - 1
            for j in range(k):
                if u < p[j]:
                    t = j
                    break
            z[pos] = t
            ndt[d, t] += 1
            ntw[t, w] += 1
            nt[t] += 1


def _flatten(docs: Sequence[Sequence[int]], vocab_size: int):
    lengths = np.fromiter((len(d) for d in docs), dtype=np.int64, count=len(docs))
    doc_ptr = np.concatenate(([0], np.cumsum(lengths))).astype(np.int64)
    words = np.fromiter((w for d in docs for w in d), dtype=np.int64, count=int(doc_ptr[-1]))
    if len(words) and (words.min() < 0 or words.max() >= vocab_size):
        bad = int(words[(words < 0) | (words >= vocab_size)][0])
        raise ValueError(f"token index {bad} outside vocabulary of size {vocab_size}")
    return doc_ptr, words


def _estimates(ndt, ntw, nt, alpha, beta):
    k, V = ntw.shape
    nd = ndt.sum(axis=1, keepdims=True)
    doc_topic = (ndt + alpha) / (nd + k * alpha)
    topic_term = (ntw + beta) / (nt[:, None] + V * beta)
    return doc_topic, topic_term


def _token_log_probs(doc_ptr, words, doc_topic, topic_term):
    doc_of = np.repeat(np.arange(len(doc_ptr) - 1), np.diff(doc_ptr))
    return np.log(np.einsum("nk,kn->n", doc_topic[doc_of], topic_term[:, words]))


def check_counts(doc_ptr, words, z, ndt, ntw, nt) -> None:
    """Raise if the count tables disagree with the token assignments."""
    if not np.array_equal(ndt.sum(axis=1), np.diff(doc_ptr)):
        raise AssertionError("document-topic counts do not sum to document lengths")
    if not np.array_equal(ntw.sum(axis=1), ndt.sum(axis=0)) or not np.array_equal(nt, ndt.sum(axis=0)):
        raise AssertionError("topic-term counts disagree with document-topic counts")
    doc_of = np.repeat(np.arange(len(doc_ptr) - 1), np.diff(doc_ptr))
    expect_dt = np.zeros_like(ndt)
    np.add.at(expect_dt, (doc_of, z), 1)
    expect_tw = np.zeros_like(ntw)
    np.add.at(expect_tw, (z, words), 1)
    if not (np.array_equal(expect_dt, ndt) and np.array_equal(expect_tw, ntw)):
        raise AssertionError("count tables disagree with assignments")


def lda_fit(docs: Sequence[Sequence[int]], vocab_size: int, cfg: LdaConfig = LdaConfig(),
            debug: bool = False) -> LdaModel:
    """Fit LDA; ``debug`` re-derives every count table after each sweep."""
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    doc_ptr, words = _flatten(docs, vocab_size)
    if len(words) == 0:
        raise ValueError("empty corpus: no document has a token")
    k, alpha, beta = cfg.k, float(cfg.alpha), float(cfg.beta)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n_docs = len(doc_ptr) - 1

    z = rng.integers(0, k, size=len(words)).astype(np.int64)
    doc_of = np.repeat(np.arange(n_docs), np.diff(doc_ptr))
    ndt = np.zeros((n_docs, k), dtype=np.int64)
    np.add.at(ndt, (doc_of, z), 1)
    ntw = np.zeros((k, vocab_size), dtype=np.int64)
    np.add.at(ntw, (z, words), 1)
    nt = ntw.sum(axis=1)

    trace = []
    for _ in range(cfg.iterations):
        _sweep(doc_ptr, words, z, ndt, ntw, nt, alpha, beta, rng.random(len(words)))
        if debug:
            check_counts(doc_ptr, words, z, ndt, ntw, nt)
        dt, tt = _estimates(ndt, ntw, nt, alpha, beta)
        trace.append(float(_token_log_probs(doc_ptr, words, dt, tt).sum()))

    doc_topic, topic_term = _estimates(ndt, ntw, nt, alpha, beta)
    assignments = [z[doc_ptr[d]:doc_ptr[d + 1]].copy() for d in range(n_docs)]
    return LdaModel(topic_term=topic_term, doc_topic=doc_topic,
                    log_likelihood_trace=trace, assignments=assignments)


def lda_perplexity(model: LdaModel, docs: Sequence[Sequence[int]]) -> float:
    """``exp(-mean log p(token))`` under the fitted document mixtures.

    ``docs`` are the documents the model was fitted on (row ``d`` of
    ``doc_topic`` belongs to ``docs[d]``).
    """
    if len(docs) != model.doc_topic.shape[0]:
        raise ValueError(f"model covers {model.doc_topic.shape[0]} documents, got {len(docs)}")
    doc_ptr, words = _flatten(docs, model.vocab_size)
    if len(words) == 0:
        raise ValueError("no tokens to evaluate")
    return float(np.exp(-_token_log_probs(doc_ptr, words, model.doc_topic, model.topic_term).mean()))


def lda_top_terms(model: LdaModel, n: int) -> list[list[int]]:
    """Per topic, the ``n`` most probable term indices (ties: lowest index)."""
    if not 0 <= n <= model.vocab_size:
        raise ValueError(f"n must lie in [0, {model.vocab_size}]")
    return [np.argsort(-row, kind="stable")[:n].tolist() for row in model.topic_term]
