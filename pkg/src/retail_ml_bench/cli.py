"""Command line entry point: ``datagen``, ``run`` and ``report`` subcommands."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import datagen, harness
from .workloads import ALGORITHMS, WORKLOADS, WorkloadSpec

EXIT_OK, EXIT_FAILED_CELL, EXIT_USAGE = 0, 1, 2


def _param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


class _Defaults(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults only where there is something meaningful to show."""

    def _get_help_string(self, action):
        if action.default in (None, [], False) or "default" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retail-ml-bench",
                                     description="Retail machine-learning benchmark.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("datagen", help="generate a dataset",
                         formatter_class=_Defaults)
    datagen.add_arguments(gen)

    all_algos = sorted({a for algos in ALGORITHMS.values() for a in algos})
    run = sub.add_parser("run", help="run workloads and report timings",
                         formatter_class=_Defaults,
                         epilog="valid pairs: " + "; ".join(f"{w}: {', '.join(a)}" for w, a in ALGORITHMS.items()))
    run.add_argument("--workload", action="append", type=str.upper, choices=WORKLOADS,
                     help="workload to run (repeatable; default: all)")
    run.add_argument("--algorithm", action="append", type=str.lower, choices=all_algos,
                     help="algorithm (repeatable; default: every valid one for the chosen workloads)")
    run.add_argument("--sf", action="append", type=float, help="scale factor (repeatable; default: 1)")
    run.add_argument("--reps", type=int, default=harness.DEFAULT_REPS, help="timed repetitions per cell")
    run.add_argument("--seed", type=int, default=42, help="seed for data generation and learners")
    run.add_argument("--data-dir", type=Path, default=Path("bench-data"),
                     help=f"dataset cache directory (env {harness.DATA_ENV} overrides)")
    run.add_argument("--regenerate", action="store_true", help="regenerate datasets even if present")
    run.add_argument("--format", choices=("csv", "markdown"), default="csv", help="report format")
    run.add_argument("--out", type=Path, help="report file (default: stdout)")
    run.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                     help="workload parameter, e.g. k=4, min_support=0.02, binary=true, hidden=[16]")
    run.add_argument("--emit-artifacts", type=Path, metavar="DIR", help="write per-cell artifact JSON here")
    run.add_argument("--concurrent", action="store_true",
                     help="run cells concurrently (timings are then not comparable)")

    rep = sub.add_parser("report", help="render a results CSV",
                         formatter_class=_Defaults)
    rep.add_argument("--in", dest="infile", type=Path, required=True, help="results CSV")
    rep.add_argument("--format", choices=("csv", "markdown"), default="markdown", help="output format")
    rep.add_argument("--out", type=Path, help="output file (default: stdout)")
    return parser


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _specs(args, parser) -> list[WorkloadSpec]:
    workloads = args.workload or list(WORKLOADS)
    params = dict(args.param)
    specs = []
    for wl in dict.fromkeys(workloads):
        algos = args.algorithm or ALGORITHMS[wl]
        for algo in dict.fromkeys(algos):
            if algo not in ALGORITHMS[wl]:
                parser.error(f"argument --algorithm: {algo!r} is not valid for workload {wl} "
                             f"(choose from {', '.join(ALGORITHMS[wl])})")
            specs.append(WorkloadSpec(wl, algo, params, seed=args.seed))
    return specs


def _run(args, parser) -> int:
    if args.reps < 1:
        parser.error("argument --reps: must be >= 1")
    sfs = args.sf or [1.0]
    if any(not sf > 0 for sf in sfs):
        parser.error("argument --sf: must be > 0")
    plan = harness.BenchPlan(specs=_specs(args, parser), sfs=sfs, reps=args.reps, seed=args.seed,
                             data_dir=harness.resolve_data_dir(args.data_dir), regenerate=args.regenerate,
                             concurrent=args.concurrent, artifacts_dir=args.emit_artifacts)
    results = harness.run_plan(plan)
    _emit(harness.write_report(results, args.format), args.out)
    failed = [r for r in results if r.failed]
    for r in failed:
        print(f"failed: {r.workload}/{r.algorithm} sf={r.sf:g}: {r.error}", file=sys.stderr)
    return EXIT_FAILED_CELL if failed else EXIT_OK


def _report(args) -> int:
    try:
        results = harness.from_csv(args.infile.read_text(encoding="utf-8"))
        _emit(harness.write_report(results, args.format), args.out)
    except (OSError, ValueError) as exc:
        print(f"report: {exc}", file=sys.stderr)
        return EXIT_FAILED_CELL
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "datagen":
            return datagen.run_cli(args)
        if args.command == "run":
            return _run(args, parser)
        return _report(args)
    except SystemExit as exc:  # argparse usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
