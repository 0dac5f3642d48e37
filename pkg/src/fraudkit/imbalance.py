"""Undersampling and K-Segments Under Bagging (K-SUB).

Label 0 is treated as the majority (normal) class and label 1 as the minority
(fraud) class throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import LabeledDataset
from .forest import ForestParams, train_forest

MEAN_VOTE = "mean_proba>=0.5"


@dataclass(frozen=True)
class SegmentPartition:
    segments: list
    K: int

    @property
    def sizes(self) -> list[int]:
        return [len(s) for s in self.segments]


def _class_index(ds: LabeledDataset):
    return np.flatnonzero(ds.labels == 0), np.flatnonzero(ds.labels == 1)


def partition_majority(ds: LabeledDataset, K: int, seed=None) -> SegmentPartition:
    """Shuffle the majority class and cut it into K disjoint segments.

    Every majority point is used; the first ``|major| mod K`` segments get one
    extra point, so sizes differ by at most one.
    """
    major, _ = _class_index(ds)
    if K < 1:
        raise ValueError("K must be at least 1")
    if K > len(major):
        raise ValueError(f"K={K} exceeds majority class size {len(major)}")
    shuffled = np.random.default_rng(seed).permutation(major)
    return SegmentPartition([np.sort(s) for s in np.array_split(shuffled, K)], K)


@dataclass(frozen=True, eq=False)
class KSubEnsemble:
    members: list
    vote: str = MEAN_VOTE
    partition: Optional[SegmentPartition] = None
    training_rows: Optional[list] = None  # per member, indices into the training set

    @property
    def K(self) -> int:
        return len(self.members)

    def member_scores(self, X) -> np.ndarray:
        return np.vstack([np.atleast_1d(m.predict_proba(X)) for m in self.members])

    def predict_proba(self, X):
        scores = combine_votes(self.member_scores(X))[1]
        return scores[0] if np.ndim(X) == 1 else scores

    def predict(self, X):
        return combine_votes(self.member_scores(X))[0]


def combine_votes(member_scores) -> tuple[np.ndarray, np.ndarray]:
    """Mean member probability, thresholded at 0.5 with ties going to the minority class.

    Scores are sorted per row before summing so the result does not depend on member order.
    """
    scores = np.sort(np.atleast_2d(member_scores), axis=0)
    score = scores.sum(axis=0) / scores.shape[0]
    return (score >= 0.5).astype(np.int64), score


def train_ksub(ds: LabeledDataset, K: int, forest_params: ForestParams = ForestParams(),
               seed=None, n_jobs: int = 1) -> KSubEnsemble:
    """One forest per majority segment, each trained on that segment plus every minority point."""
    _, minor = _class_index(ds)
    if len(minor) == 0:
        raise ValueError("minority class is empty; K-SUB needs both classes")
    seeds = np.random.SeedSequence(seed).spawn(K + 1)
    partition = partition_majority(ds, K, seeds[0])
    members, training_rows = [], []
    for segment, member_seed in zip(partition.segments, seeds[1:]):
        rows = np.concatenate([segment, minor])
        forest_seed = int(member_seed.generate_state(1)[0])
        members.append(train_forest(ds.subset(rows), forest_params, forest_seed, n_jobs=n_jobs))
        training_rows.append(rows)
    return KSubEnsemble(members, MEAN_VOTE, partition, training_rows)


def predict_ksub(e: KSubEnsemble, x):
    """(class, score) for a single row, or (classes, scores) for a matrix."""
    classes, scores = combine_votes(e.member_scores(x))
    if np.ndim(x) == 1:
        return int(classes[0]), float(scores[0])
    return classes, scores


def _target_majority(n_minor: int, ratio: float) -> int:
    if not ratio > 0:
        raise ValueError("ratio must be positive")
    # rounding guard: 492 / 0.4 must give 1230, not 1231
    return math.ceil(round(n_minor / ratio, 9))


def random_undersample(ds: LabeledDataset, ratio: float, seed=None) -> LabeledDataset:
    """Keep every minority row and ``ceil(|minor| / ratio)`` majority rows drawn without replacement."""
    major, minor = _class_index(ds)
    target = _target_majority(len(minor), ratio)
    if target > len(major):
        raise ValueError(f"ratio {ratio} needs {target} majority rows, only {len(major)} exist")
    keep = np.random.default_rng(seed).choice(major, size=target, replace=False)
    return ds.subset(np.sort(np.concatenate([keep, minor])))


def cluster_centroids(ds: LabeledDataset, ratio: float, kmeans_params: Optional[dict] = None,
                      seed=None) -> LabeledDataset:
    """Replace the majority class by the k-means centroids of its rows, k = ceil(|minor| / ratio).

    Centroid rows come first (label 0), then the untouched minority rows. Features
    are clustered as given; rescale beforehand if columns have very different units.
    Timestamps are dropped because centroids have none.
    """
    from sklearn.cluster import KMeans

    major, minor = _class_index(ds)
    k = _target_majority(len(minor), ratio)
    if k > len(major):
        raise ValueError(f"ratio {ratio} needs {k} centroids, majority has {len(major)} rows")
    X_major = ds.features[major]
    n_distinct = len(np.unique(X_major, axis=0))
    if k > n_distinct:
        raise ValueError(f"cannot initialise {k} clusters from {n_distinct} distinct majority points")
    params = dict(init="k-means++", n_init=1, max_iter=300, tol=1e-4)
    params.update(kmeans_params or {})
    km = KMeans(n_clusters=k, random_state=seed, **params).fit(X_major)
    X = np.vstack([km.cluster_centers_, ds.features[minor]])
    y = np.r_[np.zeros(k, dtype=np.int64), np.ones(len(minor), dtype=np.int64)]
    return LabeledDataset(X, y, None, ds.feature_names)


def under_bagging(ds: LabeledDataset, n_bags: int, forest_params: ForestParams = ForestParams(),
                  seed=None) -> KSubEnsemble:
    """Baseline: each bag draws |minor| majority rows with replacement, plus all minority rows."""
    major, minor = _class_index(ds)
    if len(minor) == 0:
        raise ValueError("minority class is empty")
    seeds = np.random.SeedSequence(seed).spawn(n_bags)
    members, training_rows = [], []
    for s in seeds:
        rng = np.random.default_rng(s)
        rows = np.concatenate([rng.choice(major, size=len(minor), replace=True), minor])
        members.append(train_forest(ds.subset(rows), forest_params, int(s.generate_state(1)[0])))
        training_rows.append(rows)
    return KSubEnsemble(members, MEAN_VOTE, None, training_rows)
