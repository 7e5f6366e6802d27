"""Repeated, timed workload execution and report rendering.

Every (spec, scale factor) cell runs ``reps`` times on a dataset that is
generated or loaded once per scale factor; load time is not part of any
rep.  A failing cell becomes a result row carrying the error instead of
aborting the plan.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import datagen
from .workloads import WORKLOADS, WorkloadSpec, run_workload, write_artifacts

log = logging.getLogger(__name__)

DATA_ENV = "RETAIL_ML_BENCH_DATA"
DEFAULT_REPS = 3

CSV_COLUMNS = ("workload", "algorithm", "sf", "rep", "seconds", "prep_seconds", "ml_seconds",
               "mean_seconds", "stddev_seconds", "metric_name", "metric_value")
ERROR_METRIC = "error"


@dataclass(frozen=True)
class BenchPlan:
    specs: Sequence[WorkloadSpec]
    sfs: Sequence[float]
    reps: int = DEFAULT_REPS
    seed: int = 42
    data_dir: Path = Path("bench-data")
    regenerate: bool = False
    concurrent: bool = False
    artifacts_dir: Optional[Path] = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.specs:
            raise ValueError("a plan needs at least one workload spec")
        if not self.sfs:
            raise ValueError("a plan needs at least one scale factor")


@dataclass
class BenchmarkResult:
    workload: str
    algorithm: str
    sf: float
    rep_seconds: list[float] = field(default_factory=list)
    rep_prep_seconds: list[float] = field(default_factory=list)
    rep_ml_seconds: list[float] = field(default_factory=list)
    mean_seconds: Optional[float] = None
    stddev_seconds: Optional[float] = None
    quality: dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def mean_prep_seconds(self) -> Optional[float]:
        return statistics.fmean(self.rep_prep_seconds) if self.rep_prep_seconds else None

    @property
    def mean_ml_seconds(self) -> Optional[float]:
        return statistics.fmean(self.rep_ml_seconds) if self.rep_ml_seconds else None

    def sort_key(self):
        return (WORKLOADS.index(self.workload), self.algorithm, self.sf)


def aggregate(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation."""
    return statistics.fmean(values), statistics.pstdev(values)


def dataset_dir(data_dir: Path, sf: float) -> Path:
    return Path(data_dir) / f"sf{sf:g}"


def obtain_dataset(plan: BenchPlan, sf: float) -> datagen.RetailDataset:
    """Load the dataset for ``sf``, (re)generating it when needed."""
    target = dataset_dir(plan.data_dir, sf)
    cfg = datagen.GenConfig(sf=sf, seed=plan.seed, output_dir=target)
    cfg_file = target / datagen.CONFIG_FILE
    fresh = (not plan.regenerate and cfg_file.is_file()
             and json.loads(cfg_file.read_text(encoding="utf-8")) == cfg.to_json())
    if not fresh:
        log.info("generating sf=%g into %s", sf, target)
        datagen.generate(cfg)
    return datagen.load(target)


def run_cell(ds: datagen.RetailDataset, spec: WorkloadSpec, sf: float, reps: int,
             artifacts_dir: Optional[Path] = None) -> BenchmarkResult:
    res = BenchmarkResult(spec.workload, spec.algorithm, sf)
    try:
        out = None
        for rep in range(reps):
            out = run_workload(ds, spec)
            res.rep_prep_seconds.append(out.prep_seconds)
            res.rep_ml_seconds.append(out.ml_seconds)
            res.rep_seconds.append(out.prep_seconds + out.ml_seconds)
            if rep and out.quality != res.quality:
                raise RuntimeError(f"quality differs between reps: {res.quality} vs {out.quality}")
            res.quality = out.quality
        res.mean_seconds, res.stddev_seconds = aggregate(res.rep_seconds)
        if artifacts_dir is not None and out is not None:
            write_artifacts(spec, out, artifacts_dir, sf)
    except Exception as exc:  # any workload failure becomes a failure row
        log.warning("%s/%s at sf=%g failed: %s", spec.workload, spec.algorithm, sf, exc)
        return BenchmarkResult(spec.workload, spec.algorithm, sf, error=f"{type(exc).__name__}: {exc}")
    return res


def run_plan(plan: BenchPlan) -> list[BenchmarkResult]:
    results: list[BenchmarkResult] = []
    for sf in plan.sfs:
        try:
            ds = obtain_dataset(plan, sf)
        except Exception as exc:
            log.warning("no dataset for sf=%g: %s", sf, exc)
            results.extend(BenchmarkResult(s.workload, s.algorithm, sf, error=f"{type(exc).__name__}: {exc}")
                           for s in plan.specs)
            continue
        if plan.concurrent:
            # timings of concurrently executed cells are not comparable
            with ThreadPoolExecutor() as pool:
                results.extend(pool.map(lambda s: run_cell(ds, s, sf, plan.reps, plan.artifacts_dir), plan.specs))
        else:
            for spec in plan.specs:
                log.info("running %s/%s at sf=%g", spec.workload, spec.algorithm, sf)
                results.append(run_cell(ds, spec, sf, plan.reps, plan.artifacts_dir))
    results.sort(key=BenchmarkResult.sort_key)
    return results


# --------------------------------------------------------------------------- reports

def _num(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def to_csv(results: Sequence[BenchmarkResult]) -> str:
    if not results:
        raise ValueError("no results to report")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        sf = repr(float(r.sf))
        if r.failed:
            w.writerow([r.workload, r.algorithm, sf, "", "", "", "", "", "", ERROR_METRIC, r.error])
            continue
        for i, (t, p, m) in enumerate(zip(r.rep_seconds, r.rep_prep_seconds, r.rep_ml_seconds), start=1):
            for name in sorted(r.quality):
                w.writerow([r.workload, r.algorithm, sf, i, _num(t), _num(p), _num(m),
                            _num(r.mean_seconds), _num(r.stddev_seconds), name, _num(r.quality[name])])
    return buf.getvalue()


def from_csv(text: str) -> list[BenchmarkResult]:
    rows = csv.DictReader(io.StringIO(text))
    if tuple(rows.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {rows.fieldnames}")
    cells: dict[tuple, BenchmarkResult] = {}
    reps: dict[tuple, dict[int, tuple[float, float, float]]] = {}
    for line, row in enumerate(rows, start=2):
        key = (row["workload"], row["algorithm"], float(row["sf"]))
        res = cells.get(key)
        if res is None:
            res = cells[key] = BenchmarkResult(*key)
            reps[key] = {}
        if row["metric_name"] == ERROR_METRIC and not row["rep"]:
            res.error = row["metric_value"]
            continue
        try:
            rep = int(row["rep"])
            reps[key][rep] = (float(row["seconds"]), float(row["prep_seconds"]), float(row["ml_seconds"]))
            res.mean_seconds = float(row["mean_seconds"])
            res.stddev_seconds = float(row["stddev_seconds"])
            res.quality[row["metric_name"]] = float(row["metric_value"])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"line {line}: {exc}") from None
    for key, res in cells.items():
        for rep in sorted(reps[key]):
            t, p, m = reps[key][rep]
            res.rep_seconds.append(t)
            res.rep_prep_seconds.append(p)
            res.rep_ml_seconds.append(m)
    return list(cells.values())


def to_markdown(results: Sequence[BenchmarkResult], value: str = "mean_seconds") -> str:
    """Grid of mean seconds: one row per workload/algorithm, one column per sf."""
    if not results:
        raise ValueError("no results to report")
    sfs = sorted({r.sf for r in results})
    rows: dict[tuple[str, str], dict[float, BenchmarkResult]] = {}
    for r in sorted(results, key=BenchmarkResult.sort_key):
        rows.setdefault((r.workload, r.algorithm), {})[r.sf] = r
    lines = ["| Workload | Algorithm | " + " | ".join(f"SF {sf:g}" for sf in sfs) + " |",
             "|---|---|" + "---:|" * len(sfs)]
    for (wl, algo), by_sf in rows.items():
        cells = []
        for sf in sfs:
            r = by_sf.get(sf)
            v = None if r is None or r.failed else getattr(r, value)
            cells.append("-" if v is None else f"{v:.3f}")
        lines.append(f"| {wl} | {algo} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_report(results: Sequence[BenchmarkResult], fmt: str = "csv") -> str:
    if fmt == "csv":
        return to_csv(results)
    if fmt == "markdown":
        return to_markdown(results)
    raise ValueError(f"unknown report format {fmt!r}")


def resolve_data_dir(cli_value: Optional[Path]) -> Path:
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    return Path(cli_value) if cli_value is not None else Path("bench-data")
