"""Gini decision trees and a bagged random forest, written from scratch on numpy.

Trees are stored as flat parallel arrays (preorder, left subtree first). A node
with ``feature == -1`` is a leaf; samples go left when ``x[feature] <= threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import LabeledDataset

FORMAT_VERSION = 1
LEAF = -1


@dataclass(frozen=True, eq=False)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    positive_fraction: np.ndarray
    sample_count: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def is_leaf(self, node: int = 0) -> bool:
        return self.feature[node] == LEAF

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Index of the leaf reached by every row of ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while len(active):
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.positive_fraction[self.apply(X)]

    def same_structure(self, other: "Tree") -> bool:
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("feature", "threshold", "left", "right", "positive_fraction", "sample_count")
        )


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_leaf: int = 1
    n_features_per_split: Optional[int] = None


def _best_split(columns, y, min_leaf):
    """Lowest weighted-Gini split over ``columns``; ties keep the earliest column, then threshold.

    Returns (column position, threshold, impurity) or None when no admissible split exists.
    Impurity is reported as n * weighted Gini / 2 = sum over children of pos*neg/size.
    """
    n = len(y)
    positive = y > 0
    total_pos = np.count_nonzero(positive)
    n_left = np.arange(1, n)
    n_right = n - n_left
    size_ok = (n_left >= min_leaf) & (n_right >= min_leaf)
    best = None
    for f, x in enumerate(columns):
        xs = np.sort(x)
        if xs[0] == xs[-1]:
            continue
        valid = size_ok & (xs[1:] > xs[:-1])
        if not valid.any():
            continue
        # positives left of cut i: those whose value first occurs at sorted position <= i
        first = np.searchsorted(xs, x[positive], side="left")
        pos_left = np.cumsum(np.bincount(first, minlength=n))[:-1]
        pos_right = total_pos - pos_left
        impurity = (pos_left * (n_left - pos_left) / n_left
                    + pos_right * (n_right - pos_right) / n_right)
        impurity = np.where(valid, impurity, np.inf)
        i = int(np.argmin(impurity))
        if best is None or impurity[i] < best[2]:
            lo, hi = xs[i], xs[i + 1]
            threshold = lo + (hi - lo) / 2.0
            if not lo <= threshold < hi:
                threshold = lo
            best = (int(f), float(threshold), float(impurity[i]))
    return best


def gini(labels) -> float:
    y = np.asarray(labels)
    if len(y) == 0:
        return 0.0
    q = y.mean()
    return float(2.0 * q * (1.0 - q))


def _build_tree(X, y, params: TreeParams, rng: np.random.Generator) -> Tree:
    n_total, p = X.shape
    m = params.n_features_per_split or p
    if not 1 <= m <= p:
        raise ValueError(f"n_features_per_split must be in [1, {p}], got {m}")
    max_depth = math.inf if params.max_depth is None else params.max_depth
    min_leaf = max(1, params.min_leaf)

    XT = np.ascontiguousarray(X.T)
    feature, threshold, left, right, frac, count = [], [], [], [], [], []
    # (sample index, depth, parent node, is-left-child)
    stack = [(np.arange(n_total), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        yn = y[idx]
        n = len(idx)
        pos = int(yn.sum())
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        frac.append(pos / n)
        count.append(n)
        if depth >= max_depth or n < 2 * min_leaf or pos == 0 or pos == n:
            continue
        features = np.sort(rng.choice(p, size=m, replace=False)) if m < p else np.arange(p)
        split = _best_split([XT[f][idx] for f in features], yn, min_leaf)
        if split is None:
            continue
        f, thr, _ = split
        f = int(features[f])
        go_left = XT[f][idx] <= thr
        feature[node] = f
        threshold[node] = thr
        # right pushed first so the left subtree is numbered first (preorder)
        stack.append((idx[~go_left], depth + 1, node, False))
        stack.append((idx[go_left], depth + 1, node, True))

    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(frac, dtype=np.float64),
        np.asarray(count, dtype=np.int64),
    )


def train_tree(ds: LabeledDataset, params: TreeParams = TreeParams(), rng=None) -> Tree:
    """Greedy binary Gini tree; stops at max_depth, min_leaf, or a pure node."""
    if ds.n_samples == 0:
        raise ValueError("cannot train a tree on an empty dataset")
    rng = np.random.default_rng(rng)
    return _build_tree(ds.features, ds.labels.astype(np.float64), params, rng)


def default_features_per_split(n_features: int) -> int:
    return max(1, min(n_features, int(round(math.sqrt(n_features)))))


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_leaf: int = 1
    n_features_per_split: Optional[int] = None
    bootstrap: bool = True


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: list
    n_features: int
    n_features_per_split: int
    seed: Optional[int]
    params: ForestParams = field(default_factory=ForestParams)

    def tree_outputs(self, X) -> np.ndarray:
        """Per-tree positive fractions, shape (n_trees, n_rows)."""
        X = self._check(X)
        return np.vstack([t.predict_proba(X) for t in self.trees])

    def predict_proba(self, X) -> np.ndarray:
        X2 = self._check(X)
        out = np.zeros(X2.shape[0])
        for t in self.trees:
            out += t.predict_proba(X2)
        out /= len(self.trees)
        return out[0] if np.ndim(X) == 1 else out

    def predict(self, X, threshold: float = 0.5):
        return (np.asarray(self.predict_proba(X)) >= threshold).astype(np.int64)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ValueError(f"dimension mismatch: model has {self.n_features} features, got {X.shape[1]}")
        return X


def _fit_one(X, y, params: TreeParams, bootstrap: bool, seed_seq) -> Tree:
    rng = np.random.default_rng(seed_seq)
    if bootstrap:
        idx = rng.integers(0, len(y), size=len(y))
        return _build_tree(X[idx], y[idx], params, rng)
    return _build_tree(X, y, params, rng)


def train_forest(ds: LabeledDataset, params: ForestParams = ForestParams(), seed: Optional[int] = None,
                 n_jobs: int = 1) -> ForestModel:
    """Bagged Gini trees, each on a with-replacement sample of size n.

    Per-tree random streams are spawned from ``seed`` up front, so the result does
    not depend on ``n_jobs``.
    """
    if params.n_trees < 1:
        raise ValueError("n_trees must be at least 1")
    if ds.n_samples == 0:
        raise ValueError("cannot train a forest on an empty dataset")
    m = params.n_features_per_split or default_features_per_split(ds.n_features)
    tree_params = TreeParams(params.max_depth, params.min_leaf, m)
    X = ds.features
    y = ds.labels.astype(np.float64)
    seeds = np.random.SeedSequence(seed).spawn(params.n_trees)
    if n_jobs == 1:
        trees = [_fit_one(X, y, tree_params, params.bootstrap, s) for s in seeds]
    else:
        from joblib import Parallel, delayed

        trees = Parallel(n_jobs=n_jobs)(
            delayed(_fit_one)(X, y, tree_params, params.bootstrap, s) for s in seeds
        )
    return ForestModel(list(trees), ds.n_features, m, seed, params)


def predict_proba(model: ForestModel, x):
    """Mean over trees of the leaf positive fraction."""
    return model.predict_proba(x)


def predict_std(model: ForestModel, x):
    """Sample standard deviation (ddof=1) of the per-tree outputs."""
    if len(model.trees) < 2:
        raise ValueError("predict_std needs at least two trees")
    out = model.tree_outputs(x).std(axis=0, ddof=1)
    return out[0] if np.ndim(x) == 1 else out


_TREE_FIELDS = ("feature", "threshold", "left", "right", "positive_fraction", "sample_count")


def save_forest(model: ForestModel, path) -> None:
    """Write a lossless ``.npz`` with a format version."""
    sizes = np.array([t.n_nodes for t in model.trees], dtype=np.int64)
    arrays = {name: np.concatenate([getattr(t, name) for t in model.trees]) for name in _TREE_FIELDS}
    p = model.params
    np.savez(
        path,
        format_version=np.int64(FORMAT_VERSION),
        sizes=sizes,
        n_features=np.int64(model.n_features),
        n_features_per_split=np.int64(model.n_features_per_split),
        seed=np.int64(-1 if model.seed is None else model.seed),
        params=np.array([p.n_trees, -1 if p.max_depth is None else p.max_depth, p.min_leaf,
                         -1 if p.n_features_per_split is None else p.n_features_per_split,
                         int(p.bootstrap)], dtype=np.int64),
        **arrays,
    )


def load_forest(path) -> ForestModel:
    with np.load(path) as data:
        version = int(data["format_version"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported forest format version {version}")
        bounds = np.concatenate([[0], np.cumsum(data["sizes"])])
        columns = {name: data[name] for name in _TREE_FIELDS}
        trees = [Tree(**{name: col[a:b].copy() for name, col in columns.items()})
                 for a, b in zip(bounds[:-1], bounds[1:])]
        n_trees, max_depth, min_leaf, m, bootstrap = (int(v) for v in data["params"])
        seed = int(data["seed"])
        params = ForestParams(n_trees, None if max_depth < 0 else max_depth, min_leaf,
                              None if m < 0 else m, bool(bootstrap))
        return ForestModel(trees, int(data["n_features"]), int(data["n_features_per_split"]),
                           None if seed < 0 else seed, params)
