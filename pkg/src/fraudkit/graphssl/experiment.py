from __future__ import annotations

from dataclasses import replace
from typing import Iterable

import numpy as np

from ..dataset import LabeledDataset
from ..metrics import MetricReport, evaluate
from .graph import build_knn_graph
from .solver import SolverConfig, label_vector, solve_ssl

# 1,208 training / 514 test transactions out of the 1,722-row reduced set
DEFAULT_TEST_FRACTION = 514 / 1722


def stratified_holdout(labels, test_fraction: float, seed) -> np.ndarray:
    """Boolean test mask holding ``round(n * test_fraction)`` rows, class proportions preserved."""
    labels = np.asarray(labels)
    n_test = int(round(len(labels) * test_fraction))
    if not 0 < n_test < len(labels):
        raise ValueError("test fraction leaves an empty train or test set")
    rng = np.random.default_rng(seed)
    test = np.zeros(len(labels), dtype=bool)
    pos = rng.permutation(np.flatnonzero(labels == 1))
    neg = rng.permutation(np.flatnonzero(labels == 0))
    n_pos = int(round(n_test * len(pos) / len(labels)))
    n_pos = min(n_pos, len(pos), n_test)
    test[pos[:n_pos]] = True
    test[neg[: n_test - n_pos]] = True
    return test


def run_holdout_experiment(ds: LabeledDataset, p_values: Iterable[float] = (2.0,),
                       cfg: SolverConfig = SolverConfig(), split_seed=0, knn: int = 5,
                       t: float = 0.1, test_fraction: float = DEFAULT_TEST_FRACTION,
                       test_mask=None) -> dict[float, MetricReport]:
    """Transductive evaluation: kNN graph over every row, labels only on training rows.

    Returns the test-row metrics (accuracy first) for each p.
    """
    if test_mask is None:
        test_mask = stratified_holdout(ds.labels, test_fraction, split_seed)
    test_mask = np.asarray(test_mask, dtype=bool)
    g = build_knn_graph(ds.features, knn, t)
    y = label_vector(ds.labels, ~test_mask)
    truth = ds.labels[test_mask]
    reports = {}
    for p in p_values:
        result = solve_ssl(g, y, replace(cfg, p=float(p)))
        predicted = (result.classes[test_mask] == 1).astype(np.int64)
        reports[float(p)] = evaluate(truth, predicted, result.f[test_mask])
    return reports
