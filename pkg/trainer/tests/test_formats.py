import numpy as np
import pytest

from catrainer.formats import FormatError, read_cads, read_spec_config, write_capr

from conftest import parse_report, run_calab, write_dataset_config


def test_read_cads_from_laboratory(tiny_dataset):
    data = read_cads(tiny_dataset)
    assert data.k == 3
    assert data.boundary == "dead"
    assert (data.height, data.width) == (16, 16)
    # 4 rules x 1 config x (5-3+1) samples for each split table
    assert len(data.splits["train"]) == 12
    assert len(data.splits["val"]) == 12
    assert len(data.splits["test"]) == 12
    split = data.splits["train"]
    assert split.inputs.shape == (12, 3, 16, 16)
    assert split.targets.shape == (12, 16, 16)
    assert set(np.unique(split.inputs)) <= {0, 1}
    assert split.rule_ids.max() < len(split.rule_notations)
    assert set(split.rule_radii().tolist()) == {1}


def test_read_cads_rejects_garbage(tmp_path):
    bad = tmp_path / "bad.cads"
    bad.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(FormatError):
        read_cads(bad)


def test_read_cads_multiradius_rules(tmp_path):
    cfg = write_dataset_config(tmp_path / "spec.cfg", train_rule_count=6, test_rule_count=3)
    out = tmp_path / "l1.cads"
    run_calab("build-dataset", "--level", "l1", "--config", cfg,
              "--rule-seed", 3, "--config-seed", 4, "--out", out)
    data = read_cads(out)
    assert set(data.splits["train"].rule_radii().tolist()) == {1, 2, 3}


def test_capr_scored_by_laboratory(tiny_dataset, tmp_path):
    """The evaluator must accept our CAPR files: exact targets score 100%."""
    data = read_cads(tiny_dataset)
    targets = data.splits["val"].targets.astype(np.float32)
    capr = tmp_path / "exact.capr"
    write_capr(capr, targets * 0.9 + 0.05)  # probabilities, correct side of 0.5
    report_path = tmp_path / "report.txt"
    run_calab("eval", "--dataset", tiny_dataset, "--split", "val",
              "--predictions", capr, "--report", report_path)
    report = parse_report(report_path)
    assert float(report["overall_accuracy"]) == 1.0


def test_capr_wrong_count_rejected_by_laboratory(tiny_dataset, tmp_path):
    import subprocess, sys
    data = read_cads(tiny_dataset)
    frames = data.splits["val"].targets[:-1].astype(np.float32)
    capr = tmp_path / "short.capr"
    write_capr(capr, frames)
    result = subprocess.run(
        [sys.executable, "-m", "calab.cli", "eval", "--dataset", str(tiny_dataset),
         "--split", "val", "--predictions", str(capr), "--report",
         str(tmp_path / "r.txt")],
        capture_output=True, text=True)
    assert result.returncode == 2


def test_capr_shape_validation(tmp_path):
    with pytest.raises(ValueError):
        write_capr(tmp_path / "x.capr", np.zeros((4, 4), dtype=np.float32))


def test_read_spec_config(tmp_path):
    cfg = write_dataset_config(tmp_path / "spec.cfg", grid_height=24)
    values = read_spec_config(cfg)
    assert values["grid_height"] == "24"
    assert values["level"] == "simple"
