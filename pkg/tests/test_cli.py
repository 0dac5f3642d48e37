import json

import numpy as np
import pytest

from fraudkit.cli import main, parse_p_values, UsageError
from fraudkit.dataset import LabeledDataset, make_drift_stream, make_imbalanced, save_csv


@pytest.fixture
def imbalanced_csv(tmp_path):
    path = tmp_path / "imb.csv"
    save_csv(make_imbalanced(150, 4, n_features=4, separation=3.0, seed=0), path)
    return path


@pytest.fixture
def stream_csv(tmp_path):
    path = tmp_path / "stream.csv"
    save_csv(make_drift_stream(6, 60, fraud_rate=0.2, seed=0), path, "Class", "Time")
    return path


def _run(argv, tmp_path, name="report.json"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, (json.loads(out.read_text()) if code == 0 else None)


def test_ksub(imbalanced_csv, tmp_path):
    code, rep = _run(["ksub", "--data", str(imbalanced_csv), "--k", "3", "--folds", "3", "--n-trees", "5"], tmp_path)
    assert code == 0
    assert len(rep["fold_f1"]) == 3
    assert rep["f1_mean"] == pytest.approx(np.mean(rep["fold_f1"]))
    assert rep["config"]["k"] == 3 and rep["config"]["seed"] == 0
    assert (tmp_path / "report.json.timing.json").exists()


def test_ksub_single_segment(imbalanced_csv, tmp_path):
    code, rep = _run(["ksub", "--data", str(imbalanced_csv), "--k", "1", "--folds", "2", "--n-trees", "3"], tmp_path)
    assert code == 0 and rep["f1_mean"] > 0.5


def test_missing_file(tmp_path, capsys):
    assert main(["ksub", "--data", str(tmp_path / "none.csv")]) == 2
    assert "missing file" in capsys.readouterr().err


def test_graphssl_range(imbalanced_csv, tmp_path):
    code, rep = _run(["graphssl", "--data", str(imbalanced_csv), "--p", "1.0..2.0", "--undersample", "none",
                      "--t", "1.0", "--max-iters", "50"], tmp_path)
    assert code == 0
    assert [r["p"] for r in rep["results"]] == [round(1 + 0.1 * i, 1) for i in range(11)]


def test_graphssl_single_p(imbalanced_csv, tmp_path):
    code, rep = _run(["graphssl", "--data", str(imbalanced_csv), "--p", "2", "--ratio", "0.5", "--t", "1"], tmp_path)
    assert code == 0 and len(rep["results"]) == 1
    assert rep["n_rows"] == 30 + 60


def test_graphssl_rejects_small_p(imbalanced_csv):
    assert main(["graphssl", "--data", str(imbalanced_csv), "--p", "0.5"]) == 2


def test_parse_p_values():
    assert parse_p_values("1.0..1.2") == [1.0, 1.1, 1.2]
    assert parse_p_values("1,2") == [1.0, 2.0]
    with pytest.raises(UsageError):
        parse_p_values("")


def test_pipeline(stream_csv, tmp_path):
    log = tmp_path / "frames.csv"
    code, rep = _run(["pipeline", "--data", str(stream_csv), "--time-col", "Time", "--frames", "6",
                      "--train-frames", "3", "--windows", "1,2", "--folds", "2", "--n-trees", "4",
                      "--k", "2", "--log", str(log)], tmp_path)
    assert code == 0
    assert len(rep["table"]) == 5
    assert log.read_text().startswith("fold,frame,horizon")


def test_pipeline_toy_two_frames(tmp_path):
    X = np.arange(20.0).reshape(10, 2)
    y = np.array([0, 1, 0, 0, 1, 0, 1, 0, 0, 1])
    path = tmp_path / "toy.csv"
    save_csv(LabeledDataset(X, y, np.arange(10.0) * 60), path, "Class", "Time")
    code, rep = _run(["pipeline", "--data", str(path), "--time-col", "Time", "--frames", "2",
                      "--train-frames", "1", "--windows", "1", "--folds", "1", "--n-trees", "3", "--k", "2"],
                     tmp_path)
    assert code == 0
    assert {r["update"] for r in rep["table"]} == {"never", "every_frame"}
    assert all(0.0 <= r["test_f1_mean"] <= 1.0 for r in rep["table"])


def test_pipeline_needs_time(stream_csv):
    assert main(["pipeline", "--data", str(stream_csv)]) == 2


def test_aggregate(stream_csv, tmp_path):
    out = tmp_path / "aug.csv"
    code = main(["aggregate", "--data", str(stream_csv), "--time-col", "Time", "--group-by", "x0",
                 "--amount", "x1", "--windows", "1,24", "--funcs", "sum,count", "--csv-out", str(out)])
    assert code == 0
    header = out.read_text().splitlines()[0].split(",")
    assert header[-5:] == ["x1_sum_1h", "x1_count_1h", "x1_sum_24h", "x1_count_24h", "Class"]


def test_aggregate_empty_functions(stream_csv, tmp_path):
    code = main(["aggregate", "--data", str(stream_csv), "--time-col", "Time", "--group-by", "x0",
                 "--funcs", "", "--csv-out", str(tmp_path / "a.csv")])
    assert code == 2


def test_argparse_usage_error():
    assert main(["ksub"]) == 2
