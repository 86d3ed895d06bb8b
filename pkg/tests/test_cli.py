import csv
import hashlib
import json
import math

import pytest

from corrsense.cli import main
from corrsense.config import RunConfig


def sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def quick_config(tmp_path):
    """Shortened pulses and few realizations so end-to-end runs take seconds."""
    cfg = RunConfig().to_dict()
    cfg["pulses"].update(omega0=0.1, width=100.0, delay=150.0, margin=4.0)
    cfg["integrator"]["dt"] = 0.2
    cfg["dataset"].update(per_class=4, n_realizations=3)
    cfg["classifier"].update(epochs=15, patience=5)
    path = tmp_path / "quick.json"
    path.write_text(json.dumps(cfg))
    return path


def test_print_default_roundtrip(capsys):
    assert main(["config", "--print-default"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert RunConfig.from_dict(doc) == RunConfig()


def test_config_overrides(capsys, quick_config, tmp_path):
    assert main(["config", "--config", str(quick_config), "--seed", "99", "--backend", "lab",
                 "--out", str(tmp_path / "o")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dataset"]["master_seed"] == 99
    assert doc["classifier"]["split_seed"] == doc["classifier"]["init_seed"] == 99
    assert doc["integrator"]["backend"] == "lab_frame"
    assert doc["output_dir"] == str(tmp_path / "o")


@pytest.mark.parametrize("doc", [{"bogus": 1}, {"physical": {"epsilon": -1.0}}, {"pulses": {"omega0": "big"}},
                                 {"pulses": {"omega0": 0.01, "width": 30.0}}, {"noise": {"gamma_lo": 0.5}}])
def test_config_errors_exit_2(tmp_path, capsys, doc):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(path), "--out", str(out)]) == 2
    assert "config error" in capsys.readouterr().err
    assert not out.exists()


def test_invalid_json_exit_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["gen-data", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_simulate_trace(tmp_path, capsys):
    out = tmp_path / "sim"
    assert main(["simulate", "--out", str(out), "--dt-out", "2.5"]) == 0
    summary = json.loads(capsys.readouterr().out)
    cfg = RunConfig()
    rows = list(csv.reader((out / "trace.csv").open()))
    assert rows[0] == ["t", "P0", "P1", "P2", "P3", "P_ee"]
    assert len(rows) - 1 == math.floor(cfg.pulses.duration / 2.5) + 1
    assert max(float(r[4]) for r in rows[1:]) < 1e-6
    assert summary["max_P3"] < 1e-6
    assert summary["populations"][1] >= 0.99


def test_simulate_noisy_classes(tmp_path, quick_config, capsys):
    for name, param in (("QS_ANTICORRELATED", "-1"), ("MK_CORRELATED", "0.01"), ("QS_UNCORRELATED", "0.05")):
        assert main(["simulate", "--config", str(quick_config), "--out", str(tmp_path), "--class", name,
                     "--param", param, "--condition", "II"]) == 0
        summary = json.loads(capsys.readouterr().out.splitlines()[-1])
        assert abs(sum(summary["populations"]) - 1) < 1e-6


def test_gen_data_train_eval(tmp_path, quick_config, capsys):
    out = tmp_path / "run"
    base = ["--config", str(quick_config), "--out", str(out)]
    assert main(["gen-data", *base, "--per-class", "10", "--realizations", "2"]) == 0
    rows = list(csv.reader((out / "dataset.csv").open()))
    assert len(rows) - 1 == 50
    assert (out / "dataset.meta.json").exists()

    assert main(["train", *base]) == 0
    report = list(csv.reader((out / "train_report.csv").open()))
    assert report[0] == ["epoch", "train_loss", "train_acc", "val_loss", "val_acc"]
    assert (out / "model.json").exists() and (out / "accuracy.svg").read_text().startswith("<svg")

    capsys.readouterr()
    assert main(["eval", *base]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    values = [float(tok.split("=")[1]) for tok in line.split()]
    assert len(values) == 4
    assert (out / "confusion.csv").read_text().startswith("true/predicted,QS_CORRELATED")
    assert "<rect" in (out / "confusion.svg").read_text()


def test_reproducible_outputs(tmp_path, quick_config):
    hashes = []
    for run in ("a", "b"):
        out = tmp_path / run
        base = ["--config", str(quick_config), "--out", str(out), "--seed", "123"]
        assert main(["gen-data", *base, "--per-class", "4"]) == 0
        assert main(["train", *base]) == 0
        hashes.append((sha(out / "dataset.csv"), sha(out / "dataset.meta.json"), sha(out / "model.json")))
    assert hashes[0] == hashes[1]


def test_train_empty_validation_exit_4(tmp_path, quick_config, capsys):
    # two rows per class leave no validation rows under the 0.7/0.15/0.15 split
    base = ["--config", str(quick_config), "--out", str(tmp_path)]
    assert main(["gen-data", *base, "--per-class", "2"]) == 0
    assert main(["train", *base]) == 4
    assert "non-empty" in capsys.readouterr().err


def test_train_missing_dataset_exit_3(tmp_path, capsys):
    assert main(["train", "--out", str(tmp_path), "--data", str(tmp_path / "missing.csv")]) == 3
    assert "missing.csv" in capsys.readouterr().err
    assert not (tmp_path / "model.json").exists()


def test_eval_malformed_model_exit_3(tmp_path, quick_config):
    out = tmp_path / "run"
    base = ["--config", str(quick_config), "--out", str(out)]
    assert main(["gen-data", *base, "--per-class", "1"]) == 0
    (out / "model.json").write_text('{"layer_sizes": [3, 5]}')
    assert main(["eval", *base]) == 3


def test_eval_perfect_fixture(tmp_path, quick_config, capsys):
    """A model that reads the label off a planted feature scores a diagonal matrix."""
    import numpy as np

    from corrsense.classifier import MlpModel
    from corrsense.dataset import Dataset, FeatureVector, save_csv

    rows = [FeatureVector(c, (float(c), 0.5, 0.5), (0.0, 0.0, 0.0), "gamma", 0.0, 0.0, k)
            for c in range(5) for k in range(6)]
    out = tmp_path / "fx"
    save_csv(Dataset(rows), out / "dataset.csv")
    # logits_k = -(x - k)^2 expanded as a 3 -> 3 -> 5 net: hidden (x, 0, 0) with relu, x >= 0
    m = MlpModel.init((3, 2, 5), 0)
    m.weights = [np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]), np.array([[2.0 * k for k in range(5)], [0.0] * 5])]
    m.biases = [np.zeros(2), np.array([-float(k * k) for k in range(5)])]
    (out / "model.json").write_text(m.to_json())
    assert main(["eval", "--config", str(quick_config), "--out", str(out), "--all-rows"]) == 0
    assert "five_class=1.0000" in capsys.readouterr().out
    lines = (out / "confusion.csv").read_text().splitlines()[1:]
    for i, line in enumerate(lines):
        counts = [int(v) for v in line.split(",")[1:]]
        assert counts == [6 if j == i else 0 for j in range(5)]
