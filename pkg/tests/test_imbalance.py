import numpy as np
import pytest

from fraudkit.dataset import LabeledDataset, make_imbalanced, stratified_kfold
from fraudkit.forest import ForestParams, train_forest
from fraudkit.metrics import confusion, precision_recall_f1
from fraudkit.imbalance import (
    _target_majority,
    cluster_centroids,
    combine_votes,
    partition_majority,
    predict_ksub,
    random_undersample,
    train_ksub,
    under_bagging,
)

FAST = ForestParams(n_trees=5)


def _counts(n_major, n_minor, n_features=2, seed=0):
    rng = np.random.default_rng(seed)
    y = np.r_[np.zeros(n_major, int), np.ones(n_minor, int)]
    return LabeledDataset(rng.normal(size=(len(y), n_features)), y)


def test_segment_sizes_with_remainder():
    part = partition_majority(_counts(10, 2), 3, seed=0)
    assert sorted(part.sizes) == [3, 3, 4]
    assert sorted(np.concatenate(part.segments)) == list(range(10))


def test_segment_sizes_exact():
    assert partition_majority(_counts(12, 2), 4, seed=5).sizes == [3, 3, 3, 3]


def test_single_segment_is_whole_majority():
    part = partition_majority(_counts(7, 3), 1, seed=1)
    np.testing.assert_array_equal(part.segments[0], np.arange(7))


def test_too_many_segments():
    with pytest.raises(ValueError):
        partition_majority(_counts(3, 1), 4)


def test_ecoli_scale_members():
    ds = make_imbalanced(336, 8, seed=0)
    n_minor = ds.n_positive
    assert 36 <= n_minor <= 38
    model = train_ksub(ds, 3, FAST, seed=0)
    assert model.K == 3
    for seg in model.partition.segments:
        assert abs(len(seg) - ds.n_negative / 3) <= 1
        assert abs(len(seg) - 100) <= 1


def test_ksub_needs_minority():
    with pytest.raises(ValueError):
        train_ksub(_counts(10, 0), 2, FAST)


def test_single_member_ksub_is_a_forest():
    ds = make_imbalanced(80, 4, seed=3)
    model = train_ksub(ds, 1, FAST, seed=2)
    scores = model.member_scores(ds.features)
    np.testing.assert_array_equal(model.predict_proba(ds.features), scores[0])


def test_vote_examples():
    cls, score = combine_votes(np.array([[1.0], [1.0], [1.0]]))
    assert cls[0] == 1 and score[0] == 1.0
    cls, score = combine_votes(np.array([[0.9], [0.2], [0.2]]))
    assert cls[0] == 0 and score[0] == pytest.approx(0.4333, abs=1e-4)
    cls, score = combine_votes(np.array([[0.6], [0.4]]))
    assert cls[0] == 1 and score[0] == 0.5


def test_predict_ksub_single_row():
    ds = make_imbalanced(60, 3, seed=1)
    model = train_ksub(ds, 2, FAST, seed=0)
    cls, score = predict_ksub(model, ds.features[0])
    assert isinstance(cls, int) and 0 <= score <= 1
    assert cls == int(score >= 0.5)


def test_ksub_deterministic():
    ds = make_imbalanced(90, 5, seed=4)
    a = train_ksub(ds, 3, FAST, seed=7).predict_proba(ds.features)
    b = train_ksub(ds, 3, FAST, seed=7).predict_proba(ds.features)
    np.testing.assert_array_equal(a, b)


def test_target_sizes():
    assert _target_majority(492, 0.4) == 1230
    assert _target_majority(3, 1.0) == 3


def test_random_undersample_counts():
    ds = _counts(50, 8)
    out = random_undersample(ds, 1.0, seed=0)
    assert out.n_negative == out.n_positive == 8
    same = random_undersample(ds, 8 / 50, seed=0)
    assert (same.n_negative, same.n_positive) == (50, 8)
    with pytest.raises(ValueError):
        random_undersample(ds, 0.1)


def test_centroids_fixed_point():
    base = np.array([[0.0, 0.0], [5.0, 5.0], [10.0, 0.0]])
    X = np.vstack([base[[0, 0, 1, 2, 2, 1]], [[3.0, 3.0], [4.0, 1.0]]])
    y = np.r_[np.zeros(6, int), np.ones(2, int)]
    out = cluster_centroids(LabeledDataset(X, y), 2 / 3, seed=0)
    assert out.n_negative == 3 and out.n_positive == 2
    got = out.features[out.labels == 0]
    np.testing.assert_allclose(got[np.lexsort(got.T[::-1])], base)
    np.testing.assert_array_equal(out.features[out.labels == 1], X[-2:])


def test_centroids_identity_ratio():
    ds = _counts(9, 3, seed=2)
    out = cluster_centroids(ds, 3 / 9, seed=0)
    assert (out.n_negative, out.n_positive) == (9, 3)


def test_centroids_need_distinct_points():
    X = np.r_[np.zeros((4, 2)), np.ones((2, 2))]
    with pytest.raises(ValueError, match="distinct"):
        cluster_centroids(LabeledDataset(X, np.r_[np.zeros(4, int), np.ones(2, int)]), 1.0)


def test_under_bagging_members():
    ds = make_imbalanced(100, 4, seed=0)
    model = under_bagging(ds, 3, FAST, seed=1)
    assert model.K == 3
    assert model.member_scores(ds.features).shape == (3, 100)


def test_ksub_beats_baselines_on_synthetic_fraud():
    ds = make_imbalanced(3000, 60, n_features=6, separation=2.5, seed=11)
    params = ForestParams(n_trees=20)
    ksub, single = [], []
    for fold, (train, test) in enumerate(stratified_kfold(ds, 3, seed=0).splits()):
        tr = ds.subset(train)
        model = train_ksub(tr, 3, params, seed=fold)
        ksub.append(precision_recall_f1(confusion(ds.labels[test], model.predict(ds.features[test])))[2])
        minor = np.flatnonzero(tr.labels == 1)
        rng = np.random.default_rng(fold)
        rows = np.r_[rng.choice(model.partition.segments[0], len(minor), replace=False), minor]
        forest = train_forest(tr.subset(rows), params, seed=fold)
        single.append(precision_recall_f1(confusion(ds.labels[test], forest.predict(ds.features[test])))[2])
    assert np.mean(ksub) > 0.0
    assert np.mean(ksub) > np.mean(single)
