"""Multi-horizon fraud detection pipeline over equal-duration time frames.

Each horizon keeps one model trained on its trailing ``window_frames`` frames.
A frame is always scored before its labels are used: a horizon with
``update="every_frame"`` retrains on the window ending at frame t only after
frame t has been scored, while ``update="never"`` keeps the model fitted on the
window that ends at the last training frame. The ensemble averages horizon
scores and thresholds at 0.5.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataset import LabeledDataset, split_time_frames, stratified_kfold
from .forest import ForestParams, train_forest
from .imbalance import combine_votes, train_ksub
from .metrics import confusion, precision_recall_f1

logger = logging.getLogger(__name__)

UPDATE_STRATEGIES = ("never", "every_frame")
_UPDATE_ALIASES = {"never": "never", "every_frame": "every_frame", "daily": "every_frame"}


@dataclass(frozen=True)
class HorizonSpec:
    window_frames: int
    update: str = "every_frame"

    def __post_init__(self):
        if self.window_frames < 1:
            raise ValueError("window_frames must be at least 1")
        update = _UPDATE_ALIASES.get(self.update)
        if update is None:
            raise ValueError(f"unknown update strategy {self.update!r}; choose from {UPDATE_STRATEGIES}")
        object.__setattr__(self, "update", update)

    @property
    def name(self) -> str:
        return f"w{self.window_frames}-{self.update}"


@dataclass(frozen=True)
class ModelParams:
    K: int = 5
    forest: ForestParams = field(default_factory=ForestParams)


def fit_window_model(ds: LabeledDataset, params: ModelParams, seed):
    """K-SUB on the window; a plain forest when the window lacks one class or has < K normals."""
    n_neg = ds.n_negative
    if ds.n_positive == 0 or n_neg == 0:
        return train_forest(ds, params.forest, seed)
    return train_ksub(ds, min(params.K, n_neg), params.forest, seed)


def _f1(labels, predictions) -> float:
    return precision_recall_f1(confusion(labels, predictions))[2]


@dataclass
class HorizonState:
    spec: HorizonSpec
    model: object
    last_trained_frame: int
    train_f1: float
    n_updates: int = 0


@dataclass
class PipelineResult:
    records: list
    horizons: list
    n_frames: int
    train_frames: int
    folds: Optional[int]

    def summary(self) -> list[dict]:
        """One row per horizon plus the ensemble: F1 mean/std across folds, non-degenerate frames only."""
        names = [h.name for h in self.horizons] + (["ensemble"] if len(self.horizons) > 1 else [])
        rows = []
        for name in names:
            recs = [r for r in self.records if r["horizon"] == name]
            fold_ids = sorted({r["fold"] for r in recs})
            scored = [r for r in recs if not r["degenerate"]]
            test_by_fold = [np.mean([r["f1"] for r in scored if r["fold"] == k] or [0.0]) for k in fold_ids]
            train_by_fold = [np.mean([r["train_f1"] for r in scored if r["fold"] == k] or [0.0])
                             for k in fold_ids]
            first = recs[0]
            rows.append({
                "horizon": name,
                "window": first["window"],
                "update": first["update"],
                "n_updates": max(r["n_updates"] for r in recs if r["fold"] == fold_ids[0]),
                "train_f1_mean": float(np.mean(train_by_fold)),
                "train_f1_std": float(np.std(train_by_fold)),
                "test_f1_mean": float(np.mean(test_by_fold)),
                "test_f1_std": float(np.std(test_by_fold)),
                "test_f1_frame_std": float(np.std([r["f1"] for r in scored])) if scored else 0.0,
                "scored_frames": len({r["frame"] for r in scored}),
                "degenerate_frames": len({r["frame"] for r in recs if r["degenerate"]}),
            })
        return rows

    def f1_by_frame(self, horizon: str) -> dict[int, float]:
        """Mean test F1 over folds for each frame of one horizon (degenerate frames included)."""
        out = {}
        for frame in sorted({r["frame"] for r in self.records}):
            vals = [r["f1"] for r in self.records if r["horizon"] == horizon and r["frame"] == frame]
            if vals:
                out[frame] = float(np.mean(vals))
        return out


def _row_splits(ds: LabeledDataset, folds: Optional[int], seed):
    if folds is None:
        everything = np.ones(ds.n_samples, dtype=bool)
        return [(everything, everything)]
    fa = stratified_kfold(ds, folds, seed)
    return [(fa.fold_of != k, fa.fold_of == k) for k in range(folds)]


def _model_seed(seed, fold: int, window: int, last_frame: int) -> int:
    # keyed by window and training range, not by strategy: never/daily share the initial model
    return int(np.random.SeedSequence([seed, fold, window, last_frame]).generate_state(1)[0])


def run_pipeline(ds: LabeledDataset, n_frames: int, train_frames: int,
                 horizons: Sequence[HorizonSpec], model_params: ModelParams = ModelParams(),
                 seed: int = 0, folds: Optional[int] = None) -> PipelineResult:
    """Walk forward over test frames ``train_frames .. n_frames-1``.

    With ``folds`` set, transactions are split by stratified k-fold: models train on
    the other folds' rows and are scored on the held-out fold's rows. Without it,
    all rows of earlier frames train and all rows of frame t are scored.
    """
    if not horizons:
        raise ValueError("at least one horizon is required")
    if not 0 < train_frames < n_frames:
        raise ValueError("need 0 < train_frames < n_frames")
    widest = max(h.window_frames for h in horizons)
    if widest > train_frames:
        raise ValueError(f"window of {widest} frames exceeds the {train_frames} frames of history")
    frames = split_time_frames(ds, n_frames).frame_of
    records = []

    for fold, (train_rows, test_rows) in enumerate(_row_splits(ds, folds, seed)):
        def window_data(last: int, window: int):
            mask = train_rows & (frames > last - window) & (frames <= last)
            return ds.subset(np.flatnonzero(mask))

        def fit(last: int, window: int):
            data = window_data(last, window)
            if data.n_samples == 0:
                return None, 0.0
            model = fit_window_model(data, model_params, _model_seed(seed, fold, window, last))
            train_f1 = _f1(data.labels, model.predict(data.features))
            return model, train_f1

        states = []
        for h in horizons:
            model, train_f1 = fit(train_frames - 1, h.window_frames)
            if model is None:
                raise ValueError(f"horizon {h.name} has no training rows before frame {train_frames}")
            states.append(HorizonState(h, model, train_frames - 1, train_f1))

        for t in range(train_frames, n_frames):
            rows = np.flatnonzero(test_rows & (frames == t))
            labels = ds.labels[rows]
            degenerate = not labels.any()
            scores = []
            for st in states:
                assert st.last_trained_frame < t
                score = np.asarray(st.model.predict_proba(ds.features[rows])) if len(rows) else np.zeros(0)
                scores.append(score)
                records.append(_record(fold, t, st.spec.name, st.spec.window_frames, st.spec.update,
                                       labels, (score >= 0.5).astype(np.int64), degenerate,
                                       st.train_f1, st.n_updates, st.last_trained_frame))
            if len(states) > 1:
                pred, _ = combine_votes(np.vstack(scores)) if len(rows) else (np.zeros(0, np.int64), None)
                records.append(_record(fold, t, "ensemble", 0, "every_frame", labels, pred, degenerate,
                                       float(np.mean([s.train_f1 for s in states])),
                                       sum(s.n_updates for s in states), t - 1))
            if t == n_frames - 1:
                break
            for st in states:
                if st.spec.update != "every_frame":
                    continue
                model, train_f1 = fit(t, st.spec.window_frames)
                if model is None:
                    logger.info("frame %d has no training rows for %s; keeping model", t, st.spec.name)
                    continue
                st.model, st.train_f1 = model, train_f1
                st.last_trained_frame = t
                st.n_updates += 1

    return PipelineResult(records, list(horizons), n_frames, train_frames, folds)


def _record(fold, frame, horizon, window, update, labels, predictions, degenerate, train_f1,
            n_updates, last_trained_frame) -> dict:
    c = confusion(labels, predictions)
    precision, recall, f1 = precision_recall_f1(c)
    return {
        "fold": fold, "frame": frame, "horizon": horizon, "window": window, "update": update,
        "n_rows": int(len(labels)), "n_positive": int(labels.sum()), "degenerate": bool(degenerate),
        "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
        "precision": precision, "recall": recall, "f1": f1,
        "train_f1": float(train_f1), "n_updates": int(n_updates),
        "last_trained_frame": int(last_trained_frame),
    }


def run_strategies(ds: LabeledDataset, n_frames: int, train_frames: int, windows: Sequence[int],
                   model_params: ModelParams = ModelParams(), seed: int = 0, folds: Optional[int] = 5,
                   strategies: Sequence[str] = UPDATE_STRATEGIES) -> dict[str, PipelineResult]:
    """One pipeline run per update strategy, each with a horizon for every window."""
    runs = {}
    for strategy in strategies:
        horizons = [HorizonSpec(w, strategy) for w in windows]
        runs[horizons[0].update] = run_pipeline(ds, n_frames, train_frames, horizons, model_params, seed, folds)
    return runs


def strategy_table(runs: dict[str, PipelineResult]) -> list[dict]:
    """Rows shaped like a (window x strategy) F1 table, plus an ensemble row for updating horizons."""
    table = []
    for strategy, result in runs.items():
        for row in result.summary():
            if row["horizon"] == "ensemble" and strategy != "every_frame":
                continue
            table.append(row)
    order = {name: i for i, name in enumerate(UPDATE_STRATEGIES)}
    table.sort(key=lambda r: (r["horizon"] == "ensemble", r["window"], order[r["update"]]))
    return table


def compare_update_strategies(ds: LabeledDataset, n_frames: int, train_frames: int,
                              windows: Sequence[int], model_params: ModelParams = ModelParams(),
                              seed: int = 0, folds: Optional[int] = 5,
                              strategies: Sequence[str] = UPDATE_STRATEGIES) -> list[dict]:
    return strategy_table(run_strategies(ds, n_frames, train_frames, windows, model_params, seed,
                                         folds, strategies))
