import json
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from retail_ml_bench import datagen
from retail_ml_bench.datagen import GenConfig, size_plan


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


@pytest.mark.parametrize("sf,customers,products,events", [(1, 1000, 150, 200000), (0.01, 10, 101, 2000)])
def test_size_plan_formula(sf, customers, products, events):
    p = size_plan(GenConfig(sf=sf))
    assert (p.customers, p.products, p.weblog_events) == (customers, products, events)
    assert p.sales == 20 * customers and p.reviews == 5 * customers


@given(st.floats(0.001, 20), st.floats(0.001, 20))
def test_size_plan_monotone(a, b):
    lo, hi = sorted((a, b))
    p, q = size_plan(GenConfig(sf=lo)), size_plan(GenConfig(sf=hi))
    assert all(getattr(p, f) <= getattr(q, f) for f in ("customers", "products", "sales", "reviews", "weblog_events"))


@pytest.mark.parametrize("sf", [0.01, 0.1, 0.5, 1, 2])
def test_row_counts_match_plan(sf):
    cfg = GenConfig(sf=sf)
    ds = datagen.generate(cfg)
    p = size_plan(cfg)
    assert len(ds.customers) == p.customers
    assert len(ds.products) == p.products
    assert len(ds.sales) == p.sales
    assert len(ds.reviews) == p.reviews
    assert len(ds.weblog) == p.weblog_events


def test_tiny_has_fifty_reviews(ds_tiny):
    assert len(ds_tiny.reviews) == 50


def test_byte_identical_regeneration(tmp_path):
    a = datagen.generate(GenConfig(sf=0.01, seed=7, output_dir=tmp_path / "a"))
    datagen.generate(GenConfig(sf=0.01, seed=7, output_dir=tmp_path / "b"))
    assert _files(tmp_path / "a") == _files(tmp_path / "b")
    other = datagen.generate(GenConfig(sf=0.01, seed=8))
    assert not a.tables_equal(other)


def test_round_trip(tmp_path):
    ds = datagen.generate(GenConfig(sf=0.01, seed=3, output_dir=tmp_path))
    back = datagen.load(tmp_path)
    assert back.tables_equal(ds)
    assert back.bundles() == ds.bundles()


def test_invalid_config_rejected_before_write(tmp_path):
    out = tmp_path / "never"
    for bad in (dict(sf=0), dict(sf=-1), dict(sf=0.1, bundle_size=2), dict(sf=0.1, sentiment_signal=1.5),
                dict(sf=0.1, seed=-1)):
        with pytest.raises(ValueError):
            datagen.generate(GenConfig(output_dir=out, **bad))
    assert not out.exists()


def test_missing_customer_reported_with_line(tmp_path):
    datagen.generate(GenConfig(sf=0.01, output_dir=tmp_path))
    path = tmp_path / "sales.csv"
    lines = path.read_text().splitlines()
    f = lines[3].split(",")
    f[1] = "999"
    lines[3] = ",".join(f)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(datagen.IntegrityError) as exc:
        datagen.load(tmp_path)
    assert "sales.csv" in str(exc.value) and ":4" in str(exc.value)


def test_empty_reviews_accepted(tmp_path):
    datagen.generate(GenConfig(sf=0.01, output_dir=tmp_path))
    path = tmp_path / "reviews.csv"
    path.write_text(path.read_text().splitlines()[0] + "\n")
    assert datagen.load(tmp_path).reviews == []


def test_missing_file_and_malformed_row(tmp_path):
    datagen.generate(GenConfig(sf=0.01, output_dir=tmp_path))
    (tmp_path / "products.csv").write_text("id,category_id\n")
    with pytest.raises(datagen.DataFormatError):
        datagen.load(tmp_path)
    (tmp_path / "customers.csv").unlink()
    with pytest.raises(datagen.DataFormatError, match="customers.csv"):
        datagen.load(tmp_path)


def test_referential_integrity(ds_default):
    n_c, n_p = len(ds_default.customers), len(ds_default.products)
    assert all(0 <= s.customer_id < n_c and 0 <= s.product_id < n_p for s in ds_default.sales)
    assert all(0 <= r.customer_id < n_c and 0 <= r.product_id < n_p for r in ds_default.reviews)
    cats = {p.id: p.category_id for p in ds_default.products}
    assert all(cats[e.item_id] == e.category_id for e in ds_default.weblog)
    ts = [e.ts for e in ds_default.weblog]
    assert ts == sorted(ts)


def test_weblog_is_json_lines(tmp_path):
    datagen.generate(GenConfig(sf=0.01, output_dir=tmp_path))
    first = json.loads((tmp_path / "weblog.jsonl").read_text().splitlines()[0])
    assert tuple(first) == datagen.WEBLOG_KEYS


def test_segment_distributions_separated():
    dist = datagen.segment_book_distributions(GenConfig())
    for i in range(len(dist)):
        for j in range(i + 1, len(dist)):
            assert 0.5 * np.abs(dist[i] - dist[j]).sum() >= 0.5


def test_bundles_contained_in_baskets(ds_default):
    baskets = defaultdict(set)
    for s in ds_default.sales:
        baskets[(s.customer_id, s.day)].add(s.product_id)
    for b in ds_default.bundles():
        share = sum(set(b) <= items for items in baskets.values()) / len(baskets)
        assert share >= 0.01


def test_review_tokens_follow_pools(ds_default):
    pools, noise = datagen.word_pools()
    vocab = set(noise).union(*pools)
    pool_sets = [set(p) for p in pools]
    hits = total = 0
    for r in ds_default.reviews:
        toks = r.text.split()
        cls = datagen.sentiment_of(r.rating)
        assert set(toks) <= vocab
        hits += sum(t in pool_sets[cls] for t in toks)
        total += len(toks)
    assert abs(hits / total - GenConfig().sentiment_signal) < 0.03


def test_zero_signal_reviews_are_pure_noise():
    ds = datagen.generate(GenConfig(sf=0.01, sentiment_signal=0.0))
    noise = set(datagen.word_pools()[1])
    assert all(t in noise for r in ds.reviews for t in r.text.split())


@pytest.mark.parametrize("rating,cls", [(1, 0), (2, 0), (3, 1), (4, 2), (5, 2)])
def test_sentiment_mapping(rating, cls):
    assert datagen.sentiment_of(rating) == cls


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_any_seed_generates(seed):
    ds = datagen.generate(GenConfig(sf=0.01, seed=seed))
    assert len(ds.customers) == 10


def test_cli(tmp_path, capsys):
    assert datagen.main(["--sf", "0.01", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sales.csv").is_file()
    assert datagen.main(["--sf", "0", "--out", str(tmp_path / "x")]) == 2
