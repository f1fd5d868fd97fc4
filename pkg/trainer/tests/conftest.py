import subprocess
import sys

import pytest


def run_calab(*args):
    """Invoke the CA laboratory CLI; datasets and scoring come only from it."""
    result = subprocess.run([sys.executable, "-m", "calab.cli", *map(str, args)],
                            capture_output=True, text=True)
    if result.returncode != 0:
        raise RuntimeError(f"calab {' '.join(map(str, args))} failed "
                           f"({result.returncode}):\n{result.stderr}")
    return result.stdout


def write_dataset_config(path, **overrides):
    defaults = dict(
        level="simple", grid_height=16, grid_width=16, k=3, steps_per_trajectory=5,
        configs_train=1, configs_val=1, configs_test=1, density=0.5,
        boundary="dead", master_seed=0, train_rule_count=4, test_rule_count=2,
    )
    defaults.update(overrides)
    path.write_text("".join(f"{k}={v}\n" for k, v in defaults.items()))
    return path


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """A small CADS file produced by the laboratory itself."""
    root = tmp_path_factory.mktemp("data")
    cfg = write_dataset_config(root / "spec.cfg")
    out = root / "tiny.cads"
    run_calab("build-dataset", "--level", "simple", "--config", cfg,
              "--rule-seed", 1, "--config-seed", 2, "--out", out)
    return out


def parse_report(path):
    values = {}
    for line in path.read_text().splitlines():
        key, _, value = line.partition("=")
        values[key] = value
    return values
