"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.
Reports are deterministic JSON; wall-clock timings go to a ``.timing.json``
sidecar and stderr so reruns produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .dataset import DatasetError, LabeledDataset, load_csv, save_csv, standardize, stratified_kfold
from .features import DEFAULT_WINDOWS_HOURS, AggregationSpec, aggregate
from .forest import ForestParams
from .graphssl import SolverConfig, run_holdout_experiment
from .imbalance import cluster_centroids, random_undersample, train_ksub
from .metrics import evaluate
from .pipeline import ModelParams, run_strategies, strategy_table

log = logging.getLogger("fraudkit")


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_p_values(text: str, step: float = 0.1) -> list[float]:
    """'2', '1,1.5,2' or a range 'a..b' walked in ``step`` increments (inclusive)."""
    if ".." in text:
        lo, hi = (float(v) for v in text.split(".."))
        n = int(round((hi - lo) / step))
        values = [round(lo + i * step, 10) for i in range(n + 1)]
    else:
        values = _floats(text)
    if not values or any(p < 1 for p in values):
        raise UsageError(f"p values must be >= 1, got {text!r}")
    return values


def _forest_params(args) -> ForestParams:
    if args.n_trees < 1:
        raise UsageError("--n-trees must be at least 1")
    return ForestParams(n_trees=args.n_trees, max_depth=args.max_depth, min_leaf=args.min_leaf)


def _load(args, keep_time=True) -> LabeledDataset:
    return load_csv(args.data, args.label_col, args.time_col if keep_time else None)


def _resolved_config(args) -> dict:
    skip = {"func", "out", "threads", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _write_report(args, report: dict, elapsed: float):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    seconds = int(round(elapsed))
    log.info("wall time: %d s", seconds)
    if args.out:
        Path(args.out).write_text(text)
        Path(str(args.out) + ".timing.json").write_text(json.dumps({"wall_time_seconds": seconds}) + "\n")
    else:
        sys.stdout.write(text)


def cmd_ksub(args) -> dict:
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    ds = _load(args)
    params = _forest_params(args)
    folds = stratified_kfold(ds, args.folds, args.seed)
    fold_f1 = []
    for fold, (train, test) in enumerate(folds.splits()):
        model = train_ksub(ds.subset(train), args.k, params, seed=[args.seed, fold], n_jobs=args.threads)
        pred = model.predict(ds.features[test])
        fold_f1.append(evaluate(ds.labels[test], pred).f1)
        log.info("fold %d F1 %.4f", fold, fold_f1[-1])
    return {
        "command": "ksub",
        "config": _resolved_config(args),
        "fold_f1": fold_f1,
        "f1_mean": float(np.mean(fold_f1)),
        "f1_std": float(np.std(fold_f1)),
    }


def cmd_graphssl(args) -> dict:
    p_values = parse_p_values(args.p, args.p_step)
    if args.mu <= 0 or args.t <= 0:
        raise UsageError("--mu and --t must be positive")
    ds = _load(args, keep_time=False)
    if args.standardize:
        ds = standardize(ds)
    if args.undersample == "cluster-centroids":
        ds = cluster_centroids(ds, args.ratio, seed=args.seed)
    elif args.undersample == "random":
        ds = random_undersample(ds, args.ratio, seed=args.seed)
    cfg = SolverConfig(mu=args.mu, epsilon=args.epsilon, max_iters=args.max_iters, tol=args.tol)
    reports = run_holdout_experiment(ds, p_values, cfg, split_seed=args.seed, knn=args.knn, t=args.t)
    return {
        "command": "graphssl",
        "config": _resolved_config(args),
        "n_rows": ds.n_samples,
        "n_features": ds.n_features,
        "results": [{"p": p, **r.to_dict()} for p, r in reports.items()],
    }


def cmd_pipeline(args) -> dict:
    if args.time_col is None:
        raise UsageError("pipeline needs --time-col")
    ds = _load(args)
    mp = ModelParams(K=args.k, forest=_forest_params(args))
    strategies = ("never", "every_frame") if args.update == "both" else (args.update,)
    folds = args.folds if args.folds > 1 else None
    runs = run_strategies(ds, args.frames, args.train_frames, args.windows, mp, args.seed, folds, strategies)
    if args.log:
        rows = [r for result in runs.values() for r in result.records]
        with open(args.log, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return {"command": "pipeline", "config": _resolved_config(args), "table": strategy_table(runs)}


def cmd_aggregate(args) -> dict:
    if args.time_col is None:
        raise UsageError("aggregate needs --time-col")
    if not args.funcs:
        raise UsageError("--funcs must name at least one function")
    try:
        spec = AggregationSpec(args.group_by, tuple(args.windows), tuple(args.funcs), args.amount)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = _load(args)
    out = aggregate(ds, args.amount, spec)
    save_csv(out, args.csv_out, args.label_col, args.time_col)
    return {"command": "aggregate", "config": _resolved_config(args), "rows": out.n_samples,
            "new_columns": spec.column_names()}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", required=True, help="input CSV with a header row")
    common.add_argument("--label-col", default="Class")
    common.add_argument("--time-col", default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="report path (stdout if omitted)")
    common.add_argument("--threads", type=int, default=1, help="cap on worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    forest = argparse.ArgumentParser(add_help=False)
    forest.add_argument("--n-trees", type=int, default=100)
    forest.add_argument("--max-depth", type=int, default=None)
    forest.add_argument("--min-leaf", type=int, default=1)

    parser = argparse.ArgumentParser(prog="fraudkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ksub", parents=[common, forest], help="stratified k-fold evaluation of K-SUB")
    p.add_argument("--k", type=int, default=3, help="number of majority segments")
    p.add_argument("--folds", type=int, default=5)
    p.set_defaults(func=cmd_ksub)

    p = sub.add_parser("graphssl", parents=[common], help="p-Laplacian semi-supervised classification")
    p.add_argument("--p", default="2", help="'2', '1,1.5,2' or '1.0..2.0'")
    p.add_argument("--p-step", type=float, default=0.1)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--t", type=float, default=0.1)
    p.add_argument("--knn", type=int, default=5)
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--undersample", choices=("none", "cluster-centroids", "random"), default="cluster-centroids")
    p.add_argument("--ratio", type=float, default=0.4)
    p.add_argument("--standardize", action="store_true",
                   help="z-score features before undersampling; keeps exp(-d/t) from underflowing on raw units")
    p.set_defaults(func=cmd_graphssl)

    p = sub.add_parser("pipeline", parents=[common, forest], help="multi-horizon pipeline with update strategies")
    p.add_argument("--frames", type=int, default=48)
    p.add_argument("--train-frames", type=int, default=24)
    p.add_argument("--windows", type=_ints, default=[1, 2, 3])
    p.add_argument("--update", choices=("daily", "never", "every_frame", "both"), default="both")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--folds", type=int, default=5, help="stratified folds; 1 disables cross-validation")
    p.add_argument("--log", default=None, help="per-frame CSV log path")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("aggregate", parents=[common], help="append trailing-window spending aggregates")
    p.add_argument("--group-by", required=True)
    p.add_argument("--csv-out", required=True, help="path for the augmented CSV")
    p.add_argument("--amount", default="Amount")
    p.add_argument("--windows", type=_floats, default=list(DEFAULT_WINDOWS_HOURS))
    p.add_argument("--funcs", type=lambda s: [f for f in s.split(",") if f.strip()], default=["avg", "sum", "count"])
    p.set_defaults(func=cmd_aggregate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        report = args.func(args)
    except (UsageError, DatasetError, FileNotFoundError, argparse.ArgumentTypeError) as exc:
        print(f"fraudkit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - any module failure is a runtime error
        print(f"fraudkit {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    _write_report(args, report, time.perf_counter() - start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
