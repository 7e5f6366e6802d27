"""Seeded synthetic retail data generator.

Produces four CSV tables (customers, products, sales, reviews) and a
JSON-lines click stream at a configurable scale factor.  Latent structure is
planted on purpose so that the workloads have something to recover:

* customers belong to segments with distinct book-category preferences,
* review text mixes sentiment-specific word pools with shared noise words,
* a few product bundles are bought together in a fixed share of baskets,
* every user has a skewed click propensity over product categories.

Randomness comes from numpy's PCG64.  Every table draws from its own stream
seeded with ``seed ^ tag(table)`` so tables are independently reproducible.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

U64_MAX = 2**64 - 1

N_CATEGORIES = 10          # category 0 holds every book
BOOK_SHARE = 0.3           # fraction of products that are books
BOOK_LINE_PROB = 0.6       # chance a non-bundle sale line is a book
STORE_PROB = 0.8           # chance a basket is bought in a physical store
SEGMENT_PEAK = 0.9         # mass a segment puts on its favourite book category
LINES_PER_CUSTOMER = 20
BASKETS_PER_CUSTOMER = 4
REVIEWS_PER_CUSTOMER = 5
EVENTS_PER_CUSTOMER = 200
N_DAYS = 365
POOL_SIZE = 200
NOISE_SIZE = 2000
MEAN_REVIEW_LEN = 30
MIN_REVIEW_LEN = 5
MEAN_SESSION_LEN = 10
CLICK_CONCENTRATION = 0.5  # Dirichlet parameter of per-user category preference

SENTIMENTS = ("negative", "neutral", "positive")

FILES = ("customers.csv", "products.csv", "sales.csv", "reviews.csv", "weblog.jsonl")
CONFIG_FILE = "genconfig.json"

HEADERS = {
    "customers.csv": ("id", "segment_id", "name"),
    "products.csv": ("id", "category_id", "is_book", "book_category_id", "bundle_id", "unit_price"),
    "sales.csv": ("id", "customer_id", "product_id", "quantity", "channel", "day"),
    "reviews.csv": ("id", "customer_id", "product_id", "rating", "text"),
}
WEBLOG_KEYS = ("ts", "user_id", "item_id", "category_id", "session_id", "action")
CHANNELS = ("store", "online")


class DataFormatError(ValueError):
    """A dataset file is missing or malformed."""

    def __init__(self, path, line: Optional[int], message: str):
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {message}")


class IntegrityError(DataFormatError):
    """A row references an identifier that does not exist."""


@dataclass(frozen=True)
class GenConfig:
    sf: float = 1.0
    seed: int = 42
    n_segments: int = 4
    n_book_categories: int = 5
    n_bundles: int = 5
    bundle_size: int = 3
    sentiment_signal: float = 0.6
    bundle_fraction: float = 0.05
    output_dir: Optional[Path] = None

    def validate(self) -> None:
        if not (isinstance(self.sf, (int, float)) and math.isfinite(self.sf) and self.sf > 0):
            raise ValueError(f"sf must be a positive finite number, got {self.sf!r}")
        if not (0 <= int(self.seed) <= U64_MAX) or int(self.seed) != self.seed:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        for name in ("n_segments", "n_book_categories", "n_bundles"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.bundle_size < 3:
            raise ValueError("bundle_size must be >= 3")
        if not 0.0 <= self.sentiment_signal <= 1.0:
            raise ValueError("sentiment_signal must lie in [0, 1]")
        if not 0.0 < self.bundle_fraction < 1.0:
            raise ValueError("bundle_fraction must lie in (0, 1)")
        plan = size_plan(self)
        n_books = _n_books(plan.products, self.n_book_categories)
        if plan.products - n_books <= self.n_bundles * self.bundle_size:
            raise ValueError("not enough non-book products to hold every bundle")
        if self.bundle_size > LINES_PER_CUSTOMER:
            raise ValueError("bundle_size exceeds the lines bought per customer")

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("output_dir")
        return d


@dataclass(frozen=True)
class SizePlan:
    customers: int
    products: int
    sales: int
    reviews: int
    weblog_events: int


class Customer(NamedTuple):
    id: int
    segment_id: int
    name: str


class Product(NamedTuple):
    id: int
    category_id: int
    is_book: bool
    book_category_id: Optional[int]
    bundle_id: Optional[int]
    unit_price: float


class SaleLine(NamedTuple):
    id: int
    customer_id: int
    product_id: int
    quantity: int
    channel: str
    day: int


class Review(NamedTuple):
    id: int
    customer_id: int
    product_id: int
    rating: int
    text: str


class WeblogEvent(NamedTuple):
    ts: int
    user_id: int
    item_id: int
    category_id: int
    session_id: int
    action: str = "click"


@dataclass
class RetailDataset:
    customers: list[Customer]
    products: list[Product]
    sales: list[SaleLine]
    reviews: list[Review]
    weblog: list[WeblogEvent]
    weblog_path: Optional[Path] = None
    config: Optional[GenConfig] = None

    @property
    def n_book_categories(self) -> int:
        if self.config is not None:
            return self.config.n_book_categories
        ids = [p.book_category_id for p in self.products if p.book_category_id is not None]
        return max(ids) + 1 if ids else 0

    def bundles(self) -> list[tuple[int, ...]]:
        """Planted bundles as sorted product-id tuples, ordered by bundle id."""
        by_id: dict[int, list[int]] = {}
        for p in self.products:
            if p.bundle_id is not None:
                by_id.setdefault(p.bundle_id, []).append(p.id)
        return [tuple(sorted(by_id[b])) for b in sorted(by_id)]

    def tables_equal(self, other: "RetailDataset") -> bool:
        return (self.customers == other.customers and self.products == other.products
                and self.sales == other.sales and self.reviews == other.reviews
                and self.weblog == other.weblog)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def size_plan(cfg: GenConfig) -> SizePlan:
    customers = max(1, _round_half_up(1000 * cfg.sf))
    return SizePlan(
        customers=customers,
        products=max(20, _round_half_up(100 + 50 * cfg.sf)),
        sales=LINES_PER_CUSTOMER * customers,
        reviews=REVIEWS_PER_CUSTOMER * customers,
        weblog_events=EVENTS_PER_CUSTOMER * customers,
    )


def sentiment_of(rating: int) -> int:
    """Map a 1-5 star rating to 0 (negative), 1 (neutral) or 2 (positive)."""
    if rating <= 2:
        return 0
    if rating == 3:
        return 1
    return 2


def _table_rng(seed: int, table: str) -> np.random.Generator:
    tag = int.from_bytes(hashlib.blake2b(table.encode(), digest_size=8).digest(), "little")
    return np.random.Generator(np.random.PCG64(int(seed) ^ tag))


def _n_books(n_products: int, n_book_categories: int) -> int:
    return max(n_book_categories, round(BOOK_SHARE * n_products))


_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


def _pseudo_words(n: int, rng: np.random.Generator, taken: set[str]) -> list[str]:
    words: list[str] = []
    while len(words) < n:
        n_syl = int(rng.integers(2, 5))
        w = "".join(_CONSONANTS[rng.integers(len(_CONSONANTS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(n_syl))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


_POOLS_CACHE: Optional[tuple[tuple[tuple[str, ...], ...], tuple[str, ...]]] = None


def word_pools() -> tuple[tuple[tuple[str, ...], ...], tuple[str, ...]]:
    """Return ``(sentiment_pools, noise_vocabulary)``.

    The word lists are fixed (independent of the generator seed) so that
    downstream checks can reconstruct them without the generating config.
    Pool ``i`` belongs to sentiment class ``i`` (see :func:`sentiment_of`).
    """
    global _POOLS_CACHE
    if _POOLS_CACHE is None:
        rng = np.random.Generator(np.random.PCG64(0x5EED_0F_70C5))
        taken: set[str] = set()
        pools = tuple(tuple(_pseudo_words(POOL_SIZE, rng, taken)) for _ in SENTIMENTS)
        noise = tuple(_pseudo_words(NOISE_SIZE, rng, taken))
        _POOLS_CACHE = (pools, noise)
    return _POOLS_CACHE


def segment_book_distributions(cfg: GenConfig) -> np.ndarray:
    """Per-segment probability vectors over book categories (rows sum to 1)."""
    b = cfg.n_book_categories
    dist = np.empty((cfg.n_segments, b))
    for s in range(cfg.n_segments):
        if b == 1:
            dist[s] = 1.0
            continue
        dist[s] = (1.0 - SEGMENT_PEAK) / (b - 1)
        dist[s, s % b] = SEGMENT_PEAK
    return dist


def _gen_products(cfg: GenConfig, n: int) -> list[Product]:
    rng = _table_rng(cfg.seed, "products")
    n_books = _n_books(n, cfg.n_book_categories)
    order = rng.permutation(n)
    is_book = np.zeros(n, dtype=bool)
    book_cat = np.full(n, -1)
    category = np.zeros(n, dtype=np.int64)
    for j, pid in enumerate(order[:n_books]):
        is_book[pid] = True
        book_cat[pid] = j % cfg.n_book_categories
    for j, pid in enumerate(order[n_books:]):
        category[pid] = 1 + j % (N_CATEGORIES - 1)
    non_books = np.sort(order[n_books:])
    bundled = rng.choice(non_books, size=cfg.n_bundles * cfg.bundle_size, replace=False)
    bundle = np.full(n, -1)
    for j, pid in enumerate(bundled):
        bundle[pid] = j // cfg.bundle_size
    prices = np.round(rng.uniform(1.0, 100.0, size=n), 2)
    return [
        Product(i, int(category[i]), bool(is_book[i]),
                int(book_cat[i]) if is_book[i] else None,
                int(bundle[i]) if bundle[i] >= 0 else None,
                float(prices[i]))
        for i in range(n)
    ]


def _gen_customers(cfg: GenConfig, n: int) -> list[Customer]:
    rng = _table_rng(cfg.seed, "customers")
    segments = rng.integers(0, cfg.n_segments, size=n)
    syll = [c + v for c in _CONSONANTS for v in _VOWELS]
    picks = rng.integers(0, len(syll), size=(n, 5))
    out = []
    for i in range(n):
        p = picks[i]
        name = (syll[p[0]] + syll[p[1]]).capitalize() + " " + (syll[p[2]] + syll[p[3]] + syll[p[4]]).capitalize()
        out.append(Customer(i, int(segments[i]), name))
    return out


def _gen_sales(cfg: GenConfig, customers: Sequence[Customer], products: Sequence[Product]) -> list[SaleLine]:
    rng = _table_rng(cfg.seed, "sales")
    min_size = max(3, cfg.bundle_size)
    n_baskets_each = max(1, min(BASKETS_PER_CUSTOMER, LINES_PER_CUSTOMER // min_size))

    books_by_cat: list[np.ndarray] = [
        np.array([p.id for p in products if p.book_category_id == c]) for c in range(cfg.n_book_categories)
    ]
    plain = np.array([p.id for p in products if not p.is_book and p.bundle_id is None])
    bundles: dict[int, list[int]] = {}
    for p in products:
        if p.bundle_id is not None:
            bundles.setdefault(p.bundle_id, []).append(p.id)
    seg_dist = segment_book_distributions(cfg)

    # basket layout: (customer, day, channel, size)
    baskets: list[tuple[int, int, str, int]] = []
    for c in customers:
        extra = rng.multinomial(LINES_PER_CUSTOMER - n_baskets_each * min_size,
                                np.full(n_baskets_each, 1.0 / n_baskets_each))
        days = np.sort(rng.choice(N_DAYS, size=n_baskets_each, replace=False))
        stores = rng.random(n_baskets_each) < STORE_PROB
        for b in range(n_baskets_each):
            baskets.append((c.id, int(days[b]), "store" if stores[b] else "online", min_size + int(extra[b])))

    n_total = len(baskets)
    contents: list[list[int]] = [[] for _ in range(n_total)]
    per_bundle = math.ceil(cfg.bundle_fraction * n_total)
    for bid in sorted(bundles):
        items = sorted(bundles[bid])
        free = [i for i in range(n_total) if baskets[i][3] - len(contents[i]) >= len(items)]
        unused = [i for i in free if not contents[i]]
        pool = unused if len(unused) >= per_bundle else free
        chosen = rng.choice(np.array(pool), size=min(per_bundle, len(pool)), replace=False)
        for i in np.sort(chosen):
            contents[i].extend(items)

    lines: list[SaleLine] = []
    for i, (cid, day, channel, size) in enumerate(baskets):
        items = contents[i]
        seen = set(items)
        seg = customers[cid].segment_id
        while len(items) < size:
            if rng.random() < BOOK_LINE_PROB:
                cat = int(rng.choice(cfg.n_book_categories, p=seg_dist[seg]))
                candidates = books_by_cat[cat]
            else:
                candidates = plain
            pid = int(candidates[rng.integers(len(candidates))])
            for _ in range(10):
                if pid not in seen:
                    break
                pid = int(candidates[rng.integers(len(candidates))])
            seen.add(pid)
            items.append(pid)
        quantities = rng.integers(1, 4, size=len(items))
        for pid, q in zip(items, quantities):
            lines.append(SaleLine(len(lines), cid, pid, int(q), channel, day))
    return lines


def _gen_reviews(cfg: GenConfig, n: int, sales: Sequence[SaleLine]) -> list[Review]:
    rng = _table_rng(cfg.seed, "reviews")
    pools, noise = word_pools()
    geo_p = 1.0 / (MEAN_REVIEW_LEN - MIN_REVIEW_LEN + 1)
    out = []
    for i in range(n):
        line = sales[int(rng.integers(len(sales)))]
        rating = int(rng.integers(1, 6))
        pool = pools[sentiment_of(rating)]
        length = MIN_REVIEW_LEN - 1 + int(rng.geometric(geo_p))
        from_pool = rng.random(length) < cfg.sentiment_signal
        pool_idx = rng.integers(0, len(pool), size=length)
        noise_idx = rng.integers(0, len(noise), size=length)
        words = [pool[pool_idx[j]] if from_pool[j] else noise[noise_idx[j]] for j in range(length)]
        out.append(Review(i, line.customer_id, line.product_id, rating, " ".join(words)))
    return out


def _gen_weblog(cfg: GenConfig, customers: Sequence[Customer], products: Sequence[Product]) -> list[WeblogEvent]:
    rng = _table_rng(cfg.seed, "weblog")
    cats = np.array([p.category_id for p in products])
    by_cat = np.argsort(cats, kind="stable")
    counts = np.bincount(cats, minlength=N_CATEGORIES)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))

    sessions: list[tuple[int, np.ndarray]] = []
    for c in customers:
        pref = rng.dirichlet(np.full(N_CATEGORIES, CLICK_CONCENTRATION))
        pref = np.where(counts > 0, pref, 0.0)
        pref /= pref.sum()
        user_cats = rng.choice(N_CATEGORIES, size=EVENTS_PER_CUSTOMER, p=pref)
        start = 0
        while start < EVENTS_PER_CUSTOMER:
            length = int(rng.geometric(1.0 / MEAN_SESSION_LEN))
            sessions.append((c.id, user_cats[start:start + length]))
            start += length
    order = rng.permutation(len(sessions))

    n_events = EVENTS_PER_CUSTOMER * len(customers)
    ts = np.cumsum(rng.integers(0, 3, size=n_events))
    ts -= ts[0]
    u = rng.random(n_events)
    events: list[WeblogEvent] = []
    k = 0
    for sid, si in enumerate(order):
        uid, scats = sessions[si]
        for cat in scats:
            cat = int(cat)
            item = int(by_cat[offsets[cat] + int(u[k] * counts[cat])])
            events.append(WeblogEvent(int(ts[k]), uid, item, cat, sid, "click"))
            k += 1
    return events


def generate(cfg: GenConfig) -> RetailDataset:
    """Generate the dataset; write it to ``cfg.output_dir`` when one is set."""
    cfg.validate()
    plan = size_plan(cfg)
    products = _gen_products(cfg, plan.products)
    customers = _gen_customers(cfg, plan.customers)
    sales = _gen_sales(cfg, customers, products)
    reviews = _gen_reviews(cfg, plan.reviews, sales)
    weblog = _gen_weblog(cfg, customers, products)
    ds = RetailDataset(customers, products, sales, reviews, weblog, config=cfg)
    if cfg.output_dir is not None:
        ds.weblog_path = write(ds, Path(cfg.output_dir))
    return ds


def _fmt_opt(v: Optional[int]) -> str:
    return "" if v is None else str(v)


def _write_rows(path: Path, header: Iterable[str], rows: Iterable[str]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for r in rows:
                fh.write(r + "\n")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc


def write(ds: RetailDataset, out: Path) -> Path:
    """Write all tables to ``out``; returns the weblog path."""
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"{out}: {exc.strerror or exc}") from exc
    _write_rows(out / "customers.csv", HEADERS["customers.csv"],
                (f"{c.id},{c.segment_id},{c.name}" for c in ds.customers))
    _write_rows(out / "products.csv", HEADERS["products.csv"],
                (f"{p.id},{p.category_id},{int(p.is_book)},{_fmt_opt(p.book_category_id)},"
                 f"{_fmt_opt(p.bundle_id)},{p.unit_price:.2f}" for p in ds.products))
    _write_rows(out / "sales.csv", HEADERS["sales.csv"],
                (f"{s.id},{s.customer_id},{s.product_id},{s.quantity},{s.channel},{s.day}" for s in ds.sales))
    _write_rows(out / "reviews.csv", HEADERS["reviews.csv"],
                (f"{r.id},{r.customer_id},{r.product_id},{r.rating},{r.text}" for r in ds.reviews))
    weblog_path = out / "weblog.jsonl"
    try:
        with open(weblog_path, "w", encoding="utf-8", newline="\n") as fh:
            for e in ds.weblog:
                fh.write(f'{{"ts": {e.ts}, "user_id": {e.user_id}, "item_id": {e.item_id}, '
                         f'"category_id": {e.category_id}, "session_id": {e.session_id}, "action": "{e.action}"}}\n')
    except OSError as exc:
        raise OSError(f"{weblog_path}: {exc.strerror or exc}") from exc
    if ds.config is not None:
        (out / CONFIG_FILE).write_text(json.dumps(ds.config.to_json(), sort_keys=True) + "\n", encoding="utf-8")
    return weblog_path


# --------------------------------------------------------------------------- loading

def _int(path, lineno, value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise DataFormatError(path, lineno, f"column {name!r}: expected integer, got {value!r}") from None


def _opt_int(path, lineno, value: str, name: str) -> Optional[int]:
    return None if value == "" else _int(path, lineno, value, name)


def _read_csv(path: Path, name: str) -> Iterator[tuple[int, list[str]]]:
    header = HEADERS[name]
    if not path.is_file():
        raise DataFormatError(path, None, "missing file")
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if tuple(first.split(",")) != header:
            raise DataFormatError(path, 1, f"bad header {first!r}, expected {','.join(header)!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",", len(header) - 1)
            if len(parts) != len(header):
                raise DataFormatError(path, lineno, f"expected {len(header)} fields, got {len(parts)}")
            yield lineno, parts


def _check_dense(path, lineno, expected: int, got: int) -> None:
    if got != expected:
        raise DataFormatError(path, lineno, f"ids must be dense from 0; expected {expected}, got {got}")


def load(directory: Path) -> RetailDataset:
    """Read and validate a dataset directory written by :func:`generate`."""
    d = Path(directory)
    for name in FILES:
        if not (d / name).is_file():
            raise DataFormatError(d / name, None, "missing file")

    customers: list[Customer] = []
    p = d / "customers.csv"
    for ln, (i, seg, name) in _read_csv(p, "customers.csv"):
        c = Customer(_int(p, ln, i, "id"), _int(p, ln, seg, "segment_id"), name)
        _check_dense(p, ln, len(customers), c.id)
        customers.append(c)

    products: list[Product] = []
    p = d / "products.csv"
    for ln, (i, cat, book, bcat, bundle, price) in _read_csv(p, "products.csv"):
        if book not in ("0", "1"):
            raise DataFormatError(p, ln, f"column 'is_book': expected 0 or 1, got {book!r}")
        try:
            unit_price = float(price)
        except ValueError:
            raise DataFormatError(p, ln, f"column 'unit_price': bad number {price!r}") from None
        pr = Product(_int(p, ln, i, "id"), _int(p, ln, cat, "category_id"), book == "1",
                     _opt_int(p, ln, bcat, "book_category_id"), _opt_int(p, ln, bundle, "bundle_id"), unit_price)
        if pr.is_book != (pr.book_category_id is not None):
            raise DataFormatError(p, ln, "book_category_id must be present iff is_book")
        _check_dense(p, ln, len(products), pr.id)
        products.append(pr)

    n_c, n_p = len(customers), len(products)

    sales: list[SaleLine] = []
    p = d / "sales.csv"
    for ln, (i, cid, pid, q, ch, day) in _read_csv(p, "sales.csv"):
        s = SaleLine(_int(p, ln, i, "id"), _int(p, ln, cid, "customer_id"), _int(p, ln, pid, "product_id"),
                     _int(p, ln, q, "quantity"), ch, _int(p, ln, day, "day"))
        _check_dense(p, ln, len(sales), s.id)
        if ch not in CHANNELS:
            raise DataFormatError(p, ln, f"column 'channel': expected store or online, got {ch!r}")
        if not 0 <= s.customer_id < n_c:
            raise IntegrityError(p, ln, f"sale {s.id} references absent customer {s.customer_id}")
        if not 0 <= s.product_id < n_p:
            raise IntegrityError(p, ln, f"sale {s.id} references absent product {s.product_id}")
        sales.append(s)

    reviews: list[Review] = []
    p = d / "reviews.csv"
    for ln, (i, cid, pid, rating, text) in _read_csv(p, "reviews.csv"):
        r = Review(_int(p, ln, i, "id"), _int(p, ln, cid, "customer_id"), _int(p, ln, pid, "product_id"),
                   _int(p, ln, rating, "rating"), text)
        _check_dense(p, ln, len(reviews), r.id)
        if not 1 <= r.rating <= 5:
            raise DataFormatError(p, ln, f"rating {r.rating} outside 1..5")
        if not r.text:
            raise DataFormatError(p, ln, "empty review text")
        if not 0 <= r.customer_id < n_c:
            raise IntegrityError(p, ln, f"review {r.id} references absent customer {r.customer_id}")
        if not 0 <= r.product_id < n_p:
            raise IntegrityError(p, ln, f"review {r.id} references absent product {r.product_id}")
        reviews.append(r)

    weblog_path = d / "weblog.jsonl"
    weblog = read_weblog(weblog_path, products)

    config = None
    if (d / CONFIG_FILE).is_file():
        raw = json.loads((d / CONFIG_FILE).read_text(encoding="utf-8"))
        config = GenConfig(**raw, output_dir=d)
    return RetailDataset(customers, products, sales, reviews, weblog, weblog_path, config)


def read_weblog(path: Path, products: Optional[Sequence[Product]] = None) -> list[WeblogEvent]:
    """Parse weblog.jsonl; when ``products`` is given, check ids and categories."""
    events: list[WeblogEvent] = []
    last_ts = -1
    with open(path, encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                e = WeblogEvent(*(obj[k] for k in WEBLOG_KEYS))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataFormatError(path, ln, f"malformed event: {exc}") from None
            if e.ts < last_ts:
                raise DataFormatError(path, ln, f"timestamp {e.ts} decreases (previous {last_ts})")
            last_ts = e.ts
            if products is not None:
                if not 0 <= e.item_id < len(products):
                    raise IntegrityError(path, ln, f"event references absent product {e.item_id}")
                if products[e.item_id].category_id != e.category_id:
                    raise IntegrityError(path, ln, f"category {e.category_id} does not match product {e.item_id}")
            events.append(e)
    return events


# --------------------------------------------------------------------------- CLI

def add_arguments(parser: argparse.ArgumentParser) -> None:
    defaults = GenConfig()
    parser.add_argument("--sf", type=float, required=True, help="scale factor (> 0)")
    parser.add_argument("--seed", type=int, default=defaults.seed, help=f"RNG seed (default {defaults.seed})")
    parser.add_argument("--out", type=Path, required=True, help="output directory")
    parser.add_argument("--n-segments", type=int, default=defaults.n_segments,
                        help=f"planted customer segments (default {defaults.n_segments})")
    parser.add_argument("--n-book-categories", type=int, default=defaults.n_book_categories,
                        help=f"book categories (default {defaults.n_book_categories})")
    parser.add_argument("--n-bundles", type=int, default=defaults.n_bundles,
                        help=f"planted co-purchase bundles (default {defaults.n_bundles})")
    parser.add_argument("--bundle-size", type=int, default=defaults.bundle_size,
                        help=f"items per bundle, >= 3 (default {defaults.bundle_size})")
    parser.add_argument("--bundle-fraction", type=float, default=defaults.bundle_fraction,
                        help=f"share of baskets containing each bundle (default {defaults.bundle_fraction})")
    parser.add_argument("--sentiment-signal", type=float, default=defaults.sentiment_signal,
                        help=f"share of review tokens from sentiment pools (default {defaults.sentiment_signal})")


def config_from_args(args: argparse.Namespace) -> GenConfig:
    return GenConfig(sf=args.sf, seed=args.seed, n_segments=args.n_segments,
                     n_book_categories=args.n_book_categories, n_bundles=args.n_bundles,
                     bundle_size=args.bundle_size, bundle_fraction=args.bundle_fraction,
                     sentiment_signal=args.sentiment_signal, output_dir=args.out)


def run_cli(args: argparse.Namespace) -> int:
    cfg = config_from_args(args)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"datagen: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        generate(cfg)
    except OSError as exc:
        print(f"datagen: {exc}", file=sys.stderr)
        return 1
    plan = size_plan(cfg)
    print(f"wrote {plan.customers} customers, {plan.products} products, {plan.sales} sales, "
          f"{plan.reviews} reviews, {plan.weblog_events} events to {cfg.output_dir}")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="datagen", description="Generate the synthetic retail dataset.")
    add_arguments(parser)
    return run_cli(parser.parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
