"""Frequent itemset mining and association rules.

Two production miners (FP-Growth and a vertical Eclat), a level-wise Apriori
used as a test oracle, rule generation, and the pairs-only baseline.  Support
thresholds are fractions at the interface; internally everything works on
integer counts with ``min_count = ceil(min_support * n_transactions)``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .datagen import DataFormatError

Number = Union[int, float, Fraction, str]

APRIORI_MAX_ITEMS = 20


class RuleIntegrityError(ValueError):
    pass


@dataclass(frozen=True)
class TransactionDB:
    transactions: tuple[tuple[int, ...], ...]
    n_items: int

    def __post_init__(self):
        for t in self.transactions:
            if any(a >= b for a, b in zip(t, t[1:])):
                raise ValueError(f"transaction {t} is not strictly increasing")
            if t and (t[0] < 0 or t[-1] >= self.n_items):
                raise ValueError(f"transaction {t} has ids outside [0, {self.n_items})")

    @classmethod
    def from_baskets(cls, baskets: Iterable[Iterable[int]], n_items: Optional[int] = None) -> "TransactionDB":
        txs = tuple(tuple(sorted(set(int(i) for i in b))) for b in baskets)
        if n_items is None:
            n_items = max((t[-1] for t in txs if t), default=-1) + 1
        return cls(txs, n_items)

    def __len__(self) -> int:
        return len(self.transactions)


@dataclass(frozen=True, order=True)
class Itemset:
    items: tuple[int, ...]
    support_count: int
    n_transactions: int

    @property
    def support(self) -> Fraction:
        return Fraction(self.support_count, self.n_transactions)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class AssociationRule:
    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    support: Fraction
    confidence: Fraction
    lift: Fraction


def as_fraction(x: Number) -> Fraction:
    """Exact rational for a threshold; floats go through their shortest repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _min_count(db: TransactionDB, min_support: Number) -> int:
    if len(db) == 0:
        raise ValueError("transaction database is empty")
    ms = as_fraction(min_support)
    if not 0 < ms <= 1:
        raise ValueError(f"min_support must lie in (0, 1], got {min_support}")
    return max(1, math.ceil(ms * len(db)))


def _canonical(found: dict[tuple[int, ...], int], n: int) -> list[Itemset]:
    return [Itemset(items, c, n) for items, c in sorted(found.items(), key=lambda kv: (len(kv[0]), kv[0]))]


# --------------------------------------------------------------------------- FP-Growth

class _Node:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict[int, _Node] = {}


def _fp_mine(patterns: list[tuple[tuple[int, ...], int]], min_count: int,
             suffix: tuple[int, ...], out: dict[tuple[int, ...], int]) -> None:
    counts: Counter[int] = Counter()
    for items, c in patterns:
        for i in items:
            counts[i] += c
    freq = {i: c for i, c in counts.items() if c >= min_count}
    if not freq:
        return
    # in-tree order: descending frequency, ties by ascending id
    rank = {i: r for r, i in enumerate(sorted(freq, key=lambda i: (-freq[i], i)))}
    root = _Node(None, None)
    header: dict[int, list[_Node]] = {i: [] for i in freq}
    for items, c in patterns:
        path = sorted((i for i in items if i in rank), key=rank.__getitem__)
        node = root
        for i in path:
            child = node.children.get(i)
            if child is None:
                child = _Node(i, node)
                node.children[i] = child
                header[i].append(child)
            child.count += c
            node = child
    for item in sorted(freq, key=rank.__getitem__, reverse=True):
        new_suffix = suffix + (item,)
        out[tuple(sorted(new_suffix))] = freq[item]
        conditional = []
        for node in header[item]:
            prefix = []
            p = node.parent
            while p.item is not None:
                prefix.append(p.item)
                p = p.parent
            if prefix:
                conditional.append((tuple(prefix), node.count))
        if conditional:
            _fp_mine(conditional, min_count, new_suffix, out)


def fp_growth(db: TransactionDB, min_support: Number) -> list[Itemset]:
    """All itemsets with support >= ``min_support``, mined through FP-trees."""
    min_count = _min_count(db, min_support)
    found: dict[tuple[int, ...], int] = {}
    weighted = Counter(db.transactions)
    _fp_mine(list(weighted.items()), min_count, (), found)
    return _canonical(found, len(db))


# --------------------------------------------------------------------------- Eclat

def eclat(db: TransactionDB, min_support: Number) -> list[Itemset]:
    """Same contract as :func:`fp_growth`, via depth-first tid-set intersection."""
    min_count = _min_count(db, min_support)
    tids: dict[int, int] = {}
    for t, items in enumerate(db.transactions):
        bit = 1 << t
        for i in items:
            tids[i] = tids.get(i, 0) | bit
    start = [(i, m) for i, m in sorted(tids.items()) if m.bit_count() >= min_count]
    found: dict[tuple[int, ...], int] = {}
    stack = [((), start)]
    while stack:
        prefix, members = stack.pop()
        for idx, (i, mask) in enumerate(members):
            items = prefix + (i,)
            found[items] = mask.bit_count()
            ext = []
            for j, other in members[idx + 1:]:
                both = mask & other
                if both.bit_count() >= min_count:
                    ext.append((j, both))
            if ext:
                stack.append((items, ext))
    return _canonical(found, len(db))


# --------------------------------------------------------------------------- oracle

def apriori_oracle(db: TransactionDB, min_support: Number) -> list[Itemset]:
    """Level-wise exhaustive search; only for small item universes."""
    if db.n_items > APRIORI_MAX_ITEMS:
        raise ValueError(f"apriori_oracle is limited to {APRIORI_MAX_ITEMS} items, got {db.n_items}")
    min_count = _min_count(db, min_support)
    sets = [frozenset(t) for t in db.transactions]
    found: dict[tuple[int, ...], int] = {}
    level = [(i,) for i in range(db.n_items)]
    while level:
        frequent = []
        for cand in level:
            c = sum(1 for t in sets if t.issuperset(cand))
            if c >= min_count:
                found[cand] = c
                frequent.append(cand)
        k = len(level[0]) + 1
        items = sorted({i for f in frequent for i in f})
        level = [cand for cand in combinations(items, k)
                 if all(sub in found for sub in combinations(cand, k - 1))]
    return _canonical(found, len(db))


# --------------------------------------------------------------------------- rules & baseline

def association_rules(itemsets: Sequence[Itemset], db_size: int,
                      min_confidence: Number = Fraction(1, 2)) -> list[AssociationRule]:
    """Rules ``A -> S \\ A`` for every frequent ``S`` (|S| >= 2) and nonempty proper ``A``."""
    min_conf = as_fraction(min_confidence)
    counts = {s.items: s.support_count for s in itemsets}

    def count(items):
        try:
            return counts[items]
        except KeyError:
            raise RuleIntegrityError(f"subset {items} missing from the itemset list") from None

    rules = []
    for s in itemsets:
        if len(s.items) < 2:
            continue
        for r in range(1, len(s.items)):
            for ante in combinations(s.items, r):
                cons = tuple(i for i in s.items if i not in ante)
                conf = Fraction(s.support_count, count(ante))
                if conf >= min_conf:
                    lift = conf / Fraction(count(cons), db_size)
                    rules.append(AssociationRule(ante, cons, Fraction(s.support_count, db_size), conf, lift))
    return rules


def frequent_pairs_baseline(db: TransactionDB, min_support: Number) -> list[Itemset]:
    """Frequent 2-itemsets by direct pair counting."""
    min_count = _min_count(db, min_support)
    pairs: Counter[tuple[int, int]] = Counter()
    for t in db.transactions:
        pairs.update(combinations(t, 2))
    return _canonical({p: c for p, c in pairs.items() if c >= min_count}, len(db))


# --------------------------------------------------------------------------- interchange

def write_transactions(db: TransactionDB, path: Path) -> None:
    """One transaction per line, space-separated item ids."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for t in db.transactions:
                fh.write(" ".join(map(str, t)) + "\n")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def read_transactions(path: Path, n_items: Optional[int] = None) -> TransactionDB:
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(path, None, "missing file")
    txs = []
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            try:
                items = [int(x) for x in line.split()]
            except ValueError:
                raise DataFormatError(path, ln, f"expected integer item ids, got {line.strip()!r}") from None
            if any(i < 0 for i in items):
                raise DataFormatError(path, ln, "negative item id")
            if len(set(items)) != len(items):
                raise DataFormatError(path, ln, "duplicate item in transaction")
            if n_items is not None and any(i >= n_items for i in items):
                raise DataFormatError(path, ln, f"item id outside [0, {n_items})")
            txs.append(items)
    return TransactionDB.from_baskets(txs, n_items)
