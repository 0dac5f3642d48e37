"""Labeled transaction datasets: CSV ingestion, stratified folds and time frames."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd


class DatasetError(ValueError):
    """Base class for ingestion and validation failures."""


class MissingColumnError(DatasetError):
    pass


class DuplicateColumnError(DatasetError):
    pass


class NonNumericCellError(DatasetError):
    pass


class NonBinaryLabelError(DatasetError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with binary labels (1 = fraud) and optional timestamps in seconds."""

    features: np.ndarray
    labels: np.ndarray
    timestamps: Optional[np.ndarray] = None
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[1] < 1:
            raise DatasetError("features must be a 2-D matrix with at least one column")
        y = np.asarray(self.labels)
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise DatasetError(
                f"labels length {y.shape} does not match {X.shape[0]} feature rows"
            )
        if not np.isin(y, (0, 1)).all():
            raise NonBinaryLabelError("non-binary label: labels must be 0 or 1")
        if not np.isfinite(X).all():
            raise NonNumericCellError("features contain NaN or infinite values")
        ts = self.timestamps
        if ts is not None:
            ts = np.asarray(ts, dtype=np.float64)
            if ts.shape != (X.shape[0],):
                raise DatasetError("timestamps length does not match feature rows")
            if not np.isfinite(ts).all():
                raise NonNumericCellError("timestamps contain NaN or infinite values")
        names = list(self.feature_names) or [f"x{i}" for i in range(X.shape[1])]
        if len(names) != X.shape[1]:
            raise DatasetError("feature_names length does not match feature columns")
        X.setflags(write=False)
        y = y.astype(np.int64)
        y.setflags(write=False)
        if ts is not None:
            ts.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_positive(self) -> int:
        return int(self.labels.sum())

    @property
    def n_negative(self) -> int:
        return self.n_samples - self.n_positive

    def __len__(self) -> int:
        return self.n_samples

    def subset(self, index) -> "LabeledDataset":
        index = np.asarray(index)
        ts = None if self.timestamps is None else self.timestamps[index]
        return LabeledDataset(self.features[index], self.labels[index], ts, self.feature_names)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.features[:, self.feature_names.index(name)]
        except ValueError:
            raise MissingColumnError(f"no feature column named {name!r}") from None


def _read_header(path: str) -> list[str]:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise DatasetError(f"{path}: missing header row")
    return [h.strip() for h in header]


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    raw = frame[column]
    values = pd.to_numeric(raw, errors="coerce")
    bad = values.isna().to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise NonNumericCellError(
            f"non-numeric cell in column {column!r} at data row {row + 1}: {raw.iloc[row]!r}"
        )
    # pandas' fast parser is not correctly rounded; Python's float is
    return raw.astype(np.float64).to_numpy()


def load_csv(path, label_column: str = "Class", time_column: Optional[str] = None) -> LabeledDataset:
    """Read a headed CSV; every column other than label/time becomes a feature, in header order."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"missing file: {path}")
    header = _read_header(path)
    dupes = sorted({h for h in header if header.count(h) > 1})
    if label_column in dupes or (time_column is not None and time_column in dupes):
        raise DuplicateColumnError(f"duplicate column(s) in header: {dupes}")
    if label_column not in header:
        raise MissingColumnError(f"label column {label_column!r} not in header")
    if time_column is not None and time_column not in header:
        raise MissingColumnError(f"time column {time_column!r} not in header")
    if dupes:
        raise DuplicateColumnError(f"duplicate column(s) in header: {dupes}")

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = header

    label_values = _numeric(frame, label_column)
    if not np.isin(label_values, (0.0, 1.0)).all():
        bad = label_values[~np.isin(label_values, (0.0, 1.0))][0]
        raise NonBinaryLabelError(f"non-binary label {bad!r} in column {label_column!r}")

    timestamps = None
    if time_column is not None:
        timestamps = _numeric(frame, time_column)
        if (timestamps < 0).any():
            raise DatasetError(f"negative time value in column {time_column!r}")

    names = [h for h in header if h not in (label_column, time_column)]
    if not names:
        raise DatasetError("no feature columns left after removing label/time columns")
    X = np.column_stack([_numeric(frame, c) for c in names])
    return LabeledDataset(X, label_values.astype(np.int64), timestamps, names)


def save_csv(ds: LabeledDataset, path, label_column: str = "Class", time_column: Optional[str] = None):
    """Write ``ds`` back out with the time column first and the label column last."""
    frame = pd.DataFrame(ds.features, columns=ds.feature_names)
    if time_column is not None and ds.timestamps is not None:
        frame.insert(0, time_column, ds.timestamps)
    frame[label_column] = ds.labels
    frame.to_csv(path, index=False, float_format="%.17g")


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    k: int

    def test_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)

    def splits(self):
        for fold in range(self.k):
            yield self.train_index(fold), self.test_index(fold)


def stratified_kfold(ds: LabeledDataset, k: int, seed: int) -> FoldAssignment:
    """Shuffle each class with ``seed`` and deal its members round-robin across ``k`` folds.

    The negative class starts dealing where the positive class stopped, so total
    fold sizes also differ by at most one.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    labels = ds.labels if isinstance(ds, LabeledDataset) else np.asarray(ds)
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for cls in (1, 0):
        members = np.flatnonzero(labels == cls)
        if len(members) < k:
            raise ValueError(f"class {cls} has {len(members)} members, fewer than k={k}")
        members = rng.permutation(members)
        fold_of[members] = (np.arange(len(members)) + offset) % k
        offset = (offset + len(members)) % k
    return FoldAssignment(fold_of, k)


@dataclass(frozen=True)
class TimeFrameSplit:
    frame_of: np.ndarray
    n_frames: int
    boundaries: np.ndarray

    def index(self, frames: Sequence[int] | int) -> np.ndarray:
        return np.flatnonzero(np.isin(self.frame_of, np.atleast_1d(frames)))


def split_time_frames(ds: LabeledDataset, n_frames: int) -> TimeFrameSplit:
    """Equal-duration frames over [min, max] time; intervals are half-open, max lands in the last."""
    if ds.timestamps is None:
        raise DatasetError("dataset has no timestamps")
    if n_frames < 1:
        raise ValueError("n_frames must be at least 1")
    t = ds.timestamps
    lo, hi = float(t.min()), float(t.max())
    if not hi > lo:
        raise DatasetError("degenerate time range: all timestamps are equal")
    boundaries = np.linspace(lo, hi, n_frames + 1)
    frame_of = np.searchsorted(boundaries, t, side="right") - 1
    frame_of = np.clip(frame_of, 0, n_frames - 1)
    return TimeFrameSplit(frame_of.astype(np.int64), n_frames, boundaries)


def standardize(ds: LabeledDataset) -> LabeledDataset:
    """Z-score every feature column; constant columns are only centred."""
    mean = ds.features.mean(axis=0)
    std = ds.features.std(axis=0)
    std[std == 0] = 1.0
    return LabeledDataset((ds.features - mean) / std, ds.labels, ds.timestamps, ds.feature_names)


def make_imbalanced(n_samples: int, imbalance_ratio: float, n_features: int = 5,
                    separation: float = 2.0, seed: int = 0) -> LabeledDataset:
    """Two Gaussian blobs with ``n_negative / n_positive ~= imbalance_ratio``."""
    rng = np.random.default_rng(seed)
    n_pos = max(1, int(round(n_samples / (imbalance_ratio + 1))))
    n_neg = n_samples - n_pos
    shift = np.zeros(n_features)
    shift[: max(1, n_features // 2)] = separation
    X = np.vstack([rng.normal(size=(n_neg, n_features)),
                   rng.normal(size=(n_pos, n_features)) + shift])
    y = np.r_[np.zeros(n_neg, dtype=np.int64), np.ones(n_pos, dtype=np.int64)]
    order = rng.permutation(n_samples)
    return LabeledDataset(X[order], y[order])


def make_drift_stream(n_frames: int, per_frame: int, flip_frame: Optional[int] = None,
                      fraud_rate: float = 0.1, frame_seconds: float = 3600.0,
                      seed: int = 0) -> LabeledDataset:
    """Timestamped 2-D stream; fraud lives in one corner of the plane.

    If ``flip_frame`` is given, from that frame on the fraud region moves to the
    opposite corner, inverting the decision boundary a stale model has learned.
    """
    rng = np.random.default_rng(seed)
    n = n_frames * per_frame
    frame = np.repeat(np.arange(n_frames), per_frame)
    t = frame * frame_seconds + np.sort(rng.uniform(0, frame_seconds, size=(n_frames, per_frame)), axis=1).ravel()
    y = (rng.random(n) < fraud_rate).astype(np.int64)
    X = rng.normal(size=(n, 2))
    centre = np.where(y[:, None] == 1, 2.5, 0.0)
    if flip_frame is not None:
        centre = np.where((frame >= flip_frame)[:, None], -centre, centre)
    X = X * np.where(y[:, None] == 1, 0.6, 1.0) + centre
    return LabeledDataset(X, y, t, ["x0", "x1"])
