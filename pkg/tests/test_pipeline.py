import numpy as np
import pytest

from fraudkit.dataset import LabeledDataset, make_drift_stream
from fraudkit.forest import ForestParams
from fraudkit.pipeline import (
    HorizonSpec,
    ModelParams,
    compare_update_strategies,
    run_pipeline,
    run_strategies,
)

SMALL = ModelParams(K=3, forest=ForestParams(n_trees=5))


@pytest.fixture(scope="module")
def stream():
    return make_drift_stream(10, 120, fraud_rate=0.15, seed=1)


def test_models_never_see_the_frame_they_score(stream):
    res = run_pipeline(stream, 10, 4, [HorizonSpec(1), HorizonSpec(2, "never"), HorizonSpec(3)], SMALL, folds=3)
    assert res.records
    for r in res.records:
        assert r["last_trained_frame"] < r["frame"]


def test_daily_trains_on_previous_frame(stream):
    res = run_pipeline(stream, 10, 4, [HorizonSpec(1, "daily")], SMALL)
    frames = [(r["frame"], r["last_trained_frame"], r["n_updates"]) for r in res.records]
    assert frames == [(t, t - 1, t - 4) for t in range(4, 10)]


def test_never_keeps_initial_model(stream):
    res = run_pipeline(stream, 10, 4, [HorizonSpec(2, "never")], SMALL)
    assert {r["last_trained_frame"] for r in res.records} == {3}
    assert {r["n_updates"] for r in res.records} == {0}


def test_strategies_share_the_initial_model(stream):
    runs = run_strategies(stream, 10, 4, [1], SMALL, folds=None)
    first = [next(r for r in run.records if r["frame"] == 4) for run in runs.values()]
    keys = ("tp", "fp", "fn", "tn", "train_f1")
    assert [first[0][k] for k in keys] == [first[1][k] for k in keys]


def test_ensemble_is_mean_vote(stream):
    res = run_pipeline(stream, 10, 4, [HorizonSpec(1), HorizonSpec(2)], SMALL)
    assert {r["horizon"] for r in res.records} == {"w1-every_frame", "w2-every_frame", "ensemble"}
    assert [row["horizon"] for row in res.summary()] == ["w1-every_frame", "w2-every_frame", "ensemble"]


def test_degenerate_frames_are_flagged_and_skipped():
    ds = make_drift_stream(6, 80, fraud_rate=0.2, seed=3)
    frame = (ds.timestamps // 3600).astype(int)
    labels = ds.labels.copy()
    labels[frame == 4] = 0
    ds = LabeledDataset(ds.features, labels, ds.timestamps, ds.feature_names)
    res = run_pipeline(ds, 6, 3, [HorizonSpec(1)], SMALL)
    rec = {r["frame"]: r for r in res.records}
    assert rec[4]["degenerate"] and rec[4]["f1"] == 0.0
    row = res.summary()[0]
    assert row["degenerate_frames"] == 1 and row["scored_frames"] == 2
    assert row["test_f1_mean"] == pytest.approx(np.mean([rec[3]["f1"], rec[5]["f1"]]))


def test_table_layout(stream):
    table = compare_update_strategies(stream, 10, 4, [1, 2], SMALL, folds=2)
    assert [(r["window"], r["update"]) for r in table] == [
        (1, "never"), (1, "every_frame"), (2, "never"), (2, "every_frame"), (0, "every_frame")]
    assert table[-1]["horizon"] == "ensemble"
    never = table[0]
    assert never["n_updates"] == 0 and table[1]["n_updates"] == 5


def test_drift_hurts_stale_model():
    ds = make_drift_stream(12, 200, flip_frame=7, fraud_rate=0.15, seed=0)
    runs = run_strategies(ds, 12, 4, [1], SMALL, folds=None)
    daily = runs["every_frame"].f1_by_frame("w1-every_frame")
    never = runs["never"].f1_by_frame("w1-never")
    post = range(8, 12)
    assert np.mean([daily[t] for t in post]) - np.mean([never[t] for t in post]) > 0.5


@pytest.mark.parametrize("kwargs", [
    dict(n_frames=4, train_frames=4),
    dict(n_frames=4, train_frames=0),
    dict(n_frames=6, train_frames=2, horizons=[HorizonSpec(3)]),
    dict(n_frames=6, train_frames=3, horizons=[]),
])
def test_bad_configuration(stream, kwargs):
    kwargs.setdefault("horizons", [HorizonSpec(1)])
    with pytest.raises(ValueError):
        run_pipeline(stream, model_params=SMALL, **kwargs)


def test_unknown_strategy():
    with pytest.raises(ValueError):
        HorizonSpec(1, "weekly")
    assert HorizonSpec(1, "daily").update == "every_frame"
