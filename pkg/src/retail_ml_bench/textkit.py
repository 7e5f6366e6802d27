"""Tokenization, vocabulary building and tf-idf weighting for review text."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

_TOKEN_RE = re.compile(r"[^\W_]+")

DEFAULT_MIN_DF = 2
DEFAULT_MAX_TERMS = 50000


class EmptyVocabularyError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it on every non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    index: Mapping[str, int]
    document_frequency: tuple[int, ...]
    n_docs: int

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def df(self, term: str) -> int:
        return self.document_frequency[self.index[term]]

    def idf(self) -> np.ndarray:
        """Smoothed inverse document frequency, ``ln((1+N)/(1+df)) + 1``."""
        df = np.asarray(self.document_frequency, dtype=np.float64)
        return np.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0

    def encode(self, tokens: Iterable[str]) -> list[int]:
        """Map tokens to indices, silently dropping out-of-vocabulary ones."""
        idx = self.index
        return [idx[t] for t in tokens if t in idx]


def build_vocabulary(docs: Sequence[Sequence[str]], min_df: int = DEFAULT_MIN_DF,
                     max_terms: int = DEFAULT_MAX_TERMS) -> Vocabulary:
    if not docs:
        raise ValueError("cannot build a vocabulary from zero documents")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc))
    kept = [(t, c) for t, c in df.items() if c >= min_df]
    if not kept:
        raise EmptyVocabularyError(f"empty vocabulary: no term reaches min_df={min_df}")
    if len(kept) > max_terms:
        kept.sort(key=lambda tc: (-tc[1], tc[0]))
        kept = kept[:max_terms]
    kept.sort()
    terms = tuple(t for t, _ in kept)
    return Vocabulary(terms=terms, index={t: i for i, t in enumerate(terms)},
                      document_frequency=tuple(c for _, c in kept), n_docs=len(docs))


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Row-compressed matrix: row ``i`` owns ``indices/data[indptr[i]:indptr[i+1]]``.

    Columns are strictly increasing within a row and no zero is stored.
    """
    n_rows: int
    n_cols: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        if len(self.indptr) != self.n_rows + 1:
            raise ValueError("indptr length must be n_rows + 1")
        if len(self.indices) != len(self.data) or self.indptr[-1] != len(self.data):
            raise ValueError("indices, data and indptr disagree on the number of entries")
        if len(self.indices) and (self.indices.min() < 0 or self.indices.max() >= self.n_cols):
            raise ValueError("column index out of range")
        steps = np.diff(self.indices)
        starts = self.indptr[1:-1]
        starts = starts[(starts > 0) & (starts < len(self.indices))]
        inner = np.ones(len(steps), dtype=bool)
        inner[starts - 1] = False
        if np.any(steps[inner] <= 0):
            raise ValueError("columns must be strictly increasing within a row")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("sparse values must be finite")
        if np.any(self.data == 0):
            raise ValueError("explicit zeros are not allowed")
        for a in (self.indptr, self.indices, self.data):
            a.setflags(write=False)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[tuple[int, float]]], n_cols: int) -> "SparseMatrix":
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for row in rows:
            last = -1
            for j, v in row:
                if j <= last or not 0 <= j < n_cols:
                    raise ValueError("row columns must be strictly increasing and within range")
                last = j
                if v != 0:
                    indices.append(j)
                    data.append(float(v))
            indptr.append(len(indices))
        return cls(len(rows), n_cols, np.asarray(indptr, dtype=np.int64),
                   np.asarray(indices, dtype=np.int64), np.asarray(data, dtype=np.float64))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    def row(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.data[lo:hi].tolist()))

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def row_norms(self) -> np.ndarray:
        m = self.to_scipy()
        return np.sqrt(np.asarray(m.multiply(m).sum(axis=1)).ravel())


def tfidf(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> SparseMatrix:
    """Raw term counts times smoothed idf, each nonzero row scaled to unit L2 norm.

    Tokens missing from ``vocab`` are ignored; a document without any known
    token yields an all-zero row.
    """
    idf = vocab.idf()
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for doc in docs:
        counts = Counter(vocab.encode(doc))
        if counts:
            cols = sorted(counts)
            w = np.array([counts[j] for j in cols], dtype=np.float64) * idf[cols]
            w /= math.sqrt(float(np.dot(w, w)))
            indices.extend(cols)
            data.extend(w.tolist())
        indptr.append(len(indices))
    return SparseMatrix(len(docs), len(vocab), np.asarray(indptr, dtype=np.int64),
                        np.asarray(indices, dtype=np.int64), np.asarray(data, dtype=np.float64))
