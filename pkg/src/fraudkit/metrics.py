"""Imbalance-aware evaluation metrics. The positive (fraud) class is label 1."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def _binary_pair(labels, predictions):
    y = np.asarray(labels)
    p = np.asarray(predictions)
    if y.shape != p.shape or y.ndim != 1:
        raise ValueError(f"length mismatch: {y.shape} labels vs {p.shape} predictions")
    for name, v in (("labels", y), ("predictions", p)):
        if not np.isin(v, (0, 1)).all():
            raise ValueError(f"{name} must be binary 0/1")
    return y.astype(bool), p.astype(bool)


def confusion(labels, predictions) -> ConfusionCounts:
    y, p = _binary_pair(labels, predictions)
    tp = int(np.count_nonzero(y & p))
    fp = int(np.count_nonzero(~y & p))
    fn = int(np.count_nonzero(y & ~p))
    tn = int(np.count_nonzero(~y & ~p))
    return ConfusionCounts(tp, fp, fn, tn)


def _ratio(num, den) -> float:
    return num / den if den else 0.0


def precision_recall_f1(c: ConfusionCounts) -> tuple[float, float, float]:
    """Precision, recall and F1; any zero denominator yields 0."""
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    return precision, recall, f1


def f_beta(precision: float, recall: float, beta: float) -> float:
    if not beta > 0:
        raise ValueError("beta must be positive")
    b2 = beta * beta
    return _ratio((1 + b2) * precision * recall, b2 * precision + recall)


def accuracy(labels, predictions) -> float:
    y, p = _binary_pair(labels, predictions)
    if len(y) == 0:
        raise ValueError("accuracy of an empty prediction set is undefined")
    return float(np.count_nonzero(y == p)) / len(y)


def roc_auc(labels, scores) -> float:
    """Mann-Whitney form: P(score of random positive > random negative), ties count half."""
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise ValueError("labels and scores must be 1-D of equal length")
    n_pos = int(np.count_nonzero(y == 1))
    n_neg = int(np.count_nonzero(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs both classes present")
    ranks = rankdata(s)
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def evaluate(labels, predictions, scores=None) -> MetricReport:
    c = confusion(labels, predictions)
    precision, recall, f1 = precision_recall_f1(c)
    auc = None
    if scores is not None and 0 < c.tp + c.fn < c.total:
        auc = roc_auc(labels, scores)
    return MetricReport(accuracy(labels, predictions), precision, recall, f1, auc)
