import csv

import numpy as np
import torch

from catrainer.cli import main
from catrainer.formats import read_cads
from catrainer.model import ModelConfig
from catrainer.training import (
    load_checkpoint,
    predict_probabilities,
    predict_to_file,
    threshold_accuracy,
    train,
)

from conftest import parse_report, run_calab


def smoke_config(**overrides):
    base = dict(k_inputs=3, base_filters=8, downsample_kernels=(2,),
                learning_rate=1e-3, epochs=1, batch_size=8, seed=0)
    base.update(overrides)
    return ModelConfig(**base)


def test_one_epoch_smoke(tiny_dataset, tmp_path):
    data = read_cads(tiny_dataset)
    result = train(data.splits, smoke_config(), tmp_path / "run",
                   data.height, data.width)
    assert len(result.history) == 1
    assert result.best_epoch == 1
    assert (tmp_path / "run" / "best.pt").exists()
    with open(result.history_path) as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 1
    assert set(rows[0]) == {"epoch", "train_loss", "train_acc", "val_loss", "val_acc"}


def test_loss_decreases(tiny_dataset, tmp_path):
    data = read_cads(tiny_dataset)
    result = train(data.splits, smoke_config(epochs=8), tmp_path / "run",
                   data.height, data.width)
    assert result.history[-1].train_loss < result.history[0].train_loss


def test_checkpoint_round_trip(tiny_dataset, tmp_path):
    data = read_cads(tiny_dataset)
    result = train(data.splits, smoke_config(epochs=2), tmp_path / "run",
                   data.height, data.width)
    model, config, height, width = load_checkpoint(result.checkpoint_path)
    assert (height, width) == (data.height, data.width)
    assert config.epochs == 2
    probs = predict_probabilities(model, data.splits["test"])
    assert probs.shape == (len(data.splits["test"]), height, width)
    assert probs.dtype == np.float32
    assert ((probs > 0) & (probs < 1)).all()
    again = predict_probabilities(model, data.splits["test"])
    assert np.array_equal(probs, again)  # eval-mode inference is deterministic


def test_best_checkpoint_is_minimum_val_loss(tiny_dataset, tmp_path):
    data = read_cads(tiny_dataset)
    result = train(data.splits, smoke_config(epochs=5), tmp_path / "run",
                   data.height, data.width)
    losses = [s.val_loss for s in result.history]
    assert result.best_val_loss == min(losses)
    assert result.history[result.best_epoch - 1].val_loss == min(losses)


def test_predict_to_file_scoreable(tiny_dataset, tmp_path):
    data = read_cads(tiny_dataset)
    result = train(data.splits, smoke_config(epochs=2), tmp_path / "run",
                   data.height, data.width)
    capr = tmp_path / "val.capr"
    count = predict_to_file(result.checkpoint_path, tiny_dataset, "val", capr)
    assert count == len(data.splits["val"])
    report_path = tmp_path / "report.txt"
    run_calab("eval", "--dataset", tiny_dataset, "--split", "val",
              "--predictions", capr, "--report", report_path)
    assert 0.0 <= float(parse_report(report_path)["overall_accuracy"]) <= 1.0


def test_threshold_accuracy_ties_alive():
    probs = torch.full((1, 1, 2, 2), 0.5)
    targets = torch.ones(1, 1, 2, 2)
    correct, total = threshold_accuracy(probs, targets)
    assert (correct, total) == (4, 4)


def test_cli_train_and_predict_end_to_end(tiny_dataset, tmp_path):
    run_dir = tmp_path / "run"
    code = main(["train", "--dataset", str(tiny_dataset), "--out-dir", str(run_dir),
                 "--epochs", "2", "--base-filters", "8", "--lr", "0.001",
                 "--batch-size", "8", "--quiet"])
    assert code == 0
    capr = tmp_path / "test.capr"
    code = main(["predict", "--checkpoint", str(run_dir / "best.pt"),
                 "--dataset", str(tiny_dataset), "--split", "test",
                 "--out", str(capr)])
    assert code == 0
    # the laboratory scores the file; an untrained-ish model still beats 0
    report_path = tmp_path / "report.txt"
    run_calab("eval", "--dataset", tiny_dataset, "--split", "test",
              "--predictions", capr, "--report", report_path)
    acc = float(parse_report(report_path)["overall_accuracy"])
    assert 0.0 <= acc <= 1.0


def test_cli_spec_mismatch_rejected(tiny_dataset, tmp_path):
    bad_spec = tmp_path / "bad.cfg"
    bad_spec.write_text("k=5\ngrid_height=16\ngrid_width=16\n")
    code = main(["train", "--dataset", str(tiny_dataset), "--out-dir",
                 str(tmp_path / "run"), "--spec", str(bad_spec), "--epochs", "1",
                 "--quiet"])
    assert code == 2
