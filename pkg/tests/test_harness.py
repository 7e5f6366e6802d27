import json
import statistics

import pytest

from retail_ml_bench import harness
from retail_ml_bench.cli import main
from retail_ml_bench.harness import BenchmarkResult, BenchPlan
from retail_ml_bench.workloads import WorkloadSpec


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("bench")


def plan(data_dir, specs, **kw):
    kw.setdefault("sfs", [0.01])
    return BenchPlan(specs=specs, data_dir=data_dir, **kw)


def test_plan_validation(data_dir):
    with pytest.raises(ValueError):
        plan(data_dir, [WorkloadSpec("M1", "eclat")], reps=0)
    with pytest.raises(ValueError):
        plan(data_dir, [])
    assert BenchPlan([WorkloadSpec("M1", "eclat")], [0.01]).reps == 3


def test_three_reps_and_aggregates(data_dir):
    res = harness.run_plan(plan(data_dir, [WorkloadSpec("M1", "eclat"), WorkloadSpec("Q26", "kmeans")]))
    assert [(r.workload, r.algorithm) for r in res] == [("Q26", "kmeans"), ("M1", "eclat")]
    for r in res:
        assert len(r.rep_seconds) == len(r.rep_prep_seconds) == len(r.rep_ml_seconds) == 3
        assert r.mean_seconds == statistics.fmean(r.rep_seconds)
        assert r.stddev_seconds == statistics.pstdev(r.rep_seconds)
        assert r.quality and r.error is None


def test_single_rep_zero_stddev(data_dir):
    (r,) = harness.run_plan(plan(data_dir, [WorkloadSpec("M2", "lda", {"iterations": 3})], reps=1))
    assert r.stddev_seconds == 0.0


def test_failure_row_and_continue(data_dir):
    specs = [WorkloadSpec("Q26", "kmeans", {"k": 10**6}), WorkloadSpec("M1", "fp_growth")]
    res = harness.run_plan(plan(data_dir, specs, reps=2))
    bad, good = res
    assert bad.failed and "k=" in bad.error and bad.rep_seconds == []
    assert not good.failed and len(good.rep_seconds) == 2
    md = harness.write_report(res, "markdown")
    assert "| Q26 | kmeans | - |" in md
    text = harness.write_report(res, "csv")
    row = [line for line in text.splitlines() if line.startswith("Q26")][0].split(",")
    assert row[4] == "" and row[9] == "error"


def test_csv_round_trip(data_dir):
    specs = [WorkloadSpec("M1", "eclat"), WorkloadSpec("Q26", "kmeans", {"k": 10**6}), WorkloadSpec("M3", "svm")]
    res = harness.run_plan(plan(data_dir, specs, sfs=[0.01, 0.02], reps=2))
    assert harness.from_csv(harness.to_csv(res)) == res


def test_markdown_shape():
    rows = [BenchmarkResult("M1", a, sf, [1.0], [0.5], [0.5], 1.0, 0.0, {"x": 1.0})
            for a in ("eclat", "fp_growth") for sf in (0.1, 1.0)]
    lines = harness.to_markdown(rows).strip().splitlines()
    assert len(lines) == 4
    assert all(line.count("|") == 5 for line in lines)


def test_empty_report_rejected():
    with pytest.raises(ValueError):
        harness.write_report([], "csv")


def test_plan_order_independence(data_dir):
    specs = [WorkloadSpec("M3", "naive_bayes"), WorkloadSpec("Q28", "naive_bayes"), WorkloadSpec("M1", "eclat")]
    a = harness.run_plan(plan(data_dir, specs, reps=1))
    b = harness.run_plan(plan(data_dir, list(reversed(specs)), reps=1))
    assert [(r.workload, r.algorithm, r.quality) for r in a] == [(r.workload, r.algorithm, r.quality) for r in b]


def test_regenerates_on_config_change(data_dir):
    harness.run_plan(plan(data_dir, [WorkloadSpec("M1", "eclat")], reps=1, seed=5))
    cfg = json.loads((harness.dataset_dir(data_dir, 0.01) / "genconfig.json").read_text())
    assert cfg["seed"] == 5


def test_concurrent_cells(data_dir):
    specs = [WorkloadSpec("M1", "eclat"), WorkloadSpec("M1", "fp_growth")]
    res = harness.run_plan(plan(data_dir, specs, reps=1, concurrent=True))
    assert res[0].quality == res[1].quality


# --------------------------------------------------------------------------- CLI

def test_cli_happy_path(tmp_path, capsys):
    code = main(["run", "--workload", "m1", "--algorithm", "fp_growth", "--sf", "0.1", "--reps", "3",
                 "--data-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert out.splitlines()[0] == ",".join(harness.CSV_COLUMNS)
    (tmp_path / "r.csv").write_text(out)
    assert main(["report", "--in", str(tmp_path / "r.csv"), "--format", "markdown"]) == 0
    assert "| M1 | fp_growth |" in capsys.readouterr().out


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["run", "--workload", "m2", "--algorithm", "kmeans", "--data-dir", str(tmp_path)]) == 2
    assert "--algorithm" in capsys.readouterr().err
    assert main(["run", "--bogus"]) == 2
    assert main(["run", "--workload", "Q99"]) == 2
    assert "--workload" in capsys.readouterr().err
    assert main(["run", "--reps", "0"]) == 2


def test_cli_failed_cell_exit_1(tmp_path, capsys):
    code = main(["run", "--workload", "Q26", "--algorithm", "kmeans", "--sf", "0.01", "--reps", "1",
                 "--param", "k=1000000", "--data-dir", str(tmp_path), "--format", "markdown"])
    assert code == 1
    assert "| Q26 | kmeans | - |" in capsys.readouterr().out


def test_cli_env_overrides_data_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(harness.DATA_ENV, str(tmp_path / "env"))
    assert main(["run", "--workload", "M1", "--algorithm", "eclat", "--sf", "0.01", "--reps", "1",
                 "--data-dir", str(tmp_path / "flag"), "--emit-artifacts", str(tmp_path / "art")]) == 0
    assert (tmp_path / "env" / "sf0.01").is_dir() and not (tmp_path / "flag").exists()
    assert list((tmp_path / "art").glob("M1_eclat*.json"))


def test_cli_datagen_and_help(tmp_path, capsys):
    assert main(["datagen", "--sf", "0.01", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "weblog.jsonl").is_file()
    assert main(["run", "--help"]) == 0
    assert "default: 3" in capsys.readouterr().out
