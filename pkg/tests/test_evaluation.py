import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from calab.dataset import slice_trajectory
from calab.engine import simulate
from calab.evaluation import (
    PredictorContractError,
    accuracy,
    binarize_probabilities,
    error_map,
    evaluate,
    format_report,
    format_report_kv,
    score_prediction_file,
    write_report,
)
from calab.io import FormatError, write_predictions
from calab.predictors import copy_last, flip_all, oracle_predictor, rulewise
from calab.rules import Rule, RuleSet, sample_rules

from conftest import random_grid


def test_accuracy_trivial_cases():
    rng = np.random.default_rng(0)
    target = random_grid(rng, 8, 8)
    assert accuracy(target, target) == 1.0
    assert accuracy(1 - target, target) == 0.0
    flipped = target.copy()
    flipped.ravel()[:16] ^= 1
    assert accuracy(flipped, target) == 0.75


def test_accuracy_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        accuracy(np.zeros((2, 3)), np.zeros((3, 2)))


def test_error_map_basics():
    grid = random_grid(np.random.default_rng(1), 6, 6)
    assert not error_map(grid, grid).any()
    one_off = grid.copy()
    one_off[2, 3] ^= 1
    m = error_map(one_off, grid)
    assert m.sum() == 1 and m[2, 3] == 1


@settings(deadline=None, max_examples=50)
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=1, max_value=12),
       st.integers(min_value=0, max_value=2**31 - 1))
def test_error_map_accuracy_identity(h, w, seed):
    rng = np.random.default_rng(seed)
    p, t = random_grid(rng, h, w), random_grid(rng, h, w)
    live = int(error_map(p, t).sum())
    assert accuracy(p, t) == (p.size - live) / p.size


def _toy_split(rule_count=3, samples_per_rule=4, seed=0):
    ruleset = sample_rules(rule_count, 1, rng_seed=seed)
    samples = []
    rng = np.random.default_rng(seed)
    for rid, rule in enumerate(ruleset):
        traj = simulate(rule, random_grid(rng, 10, 10), samples_per_rule + 2, "dead")
        samples.extend(slice_trajectory(traj, 3, rule_id=rid)[:samples_per_rule])
    return ruleset, samples


def test_oracle_scores_one(gol):
    ruleset, samples = _toy_split()
    bank = rulewise(oracle_predictor, ruleset)
    report = evaluate(bank, samples, ruleset, collect_error_maps=True)
    assert report.overall_accuracy == 1.0
    assert all(acc == 1.0 for acc, _ in report.per_rule.values())
    assert all(not m.any() for m in report.error_maps)


def test_aggregation_consistency():
    ruleset, samples = _toy_split(rule_count=4, samples_per_rule=3, seed=3)
    report = evaluate(copy_last(), samples, ruleset)
    # overall equals the cell-weighted mean of per-rule accuracies
    total_cells = sum(s.target.size for s in samples)
    weighted = sum(acc * n * samples[0].target.size for acc, n in report.per_rule.values())
    assert report.correct_cells == round(weighted)
    assert report.total_cells == total_cells
    assert abs(report.overall_accuracy - weighted / total_cells) < 1e-12


def test_copy_last_perfect_on_static_rule():
    # born empty + stay everything: any grid is a fixed point
    static = Rule(radius=1, born=frozenset(), stay=frozenset(range(9)))
    other = sample_rules(1, 1, rng_seed=9)[0]
    ruleset = RuleSet([static, other])
    rng = np.random.default_rng(5)
    samples = []
    for rid, rule in enumerate(ruleset):
        grid = random_grid(rng, 8, 8)
        traj = simulate(rule, grid, 4, "dead")
        if rid == 0:
            assert np.array_equal(traj.states[0], traj.states[-1])  # fixed point
        samples.extend(slice_trajectory(traj, 2, rule_id=rid))
    report = evaluate(copy_last(), samples, ruleset)
    assert report.per_rule[0][0] == 1.0


def test_flip_all_baseline_reported():
    ruleset, samples = _toy_split(seed=11)
    report = evaluate(flip_all(), samples, ruleset)
    assert set(report.baseline_accuracies) == {"constant", "copy-last", "flip-all"}
    assert report.baseline_accuracies["flip-all"] == report.overall_accuracy
    assert (report.baseline_accuracies["copy-last"]
            == 1.0 - report.baseline_accuracies["flip-all"])


def test_per_radius_breakdown():
    r1 = sample_rules(2, 1, rng_seed=1).rules
    r2 = sample_rules(2, 2, rng_seed=2).rules
    ruleset = RuleSet(r1 + r2)
    rng = np.random.default_rng(7)
    samples = []
    for rid, rule in enumerate(ruleset):
        traj = simulate(rule, random_grid(rng, 9, 9), 4, "dead")
        samples.extend(slice_trajectory(traj, 2, rule_id=rid))
    report = evaluate(rulewise(oracle_predictor, ruleset), samples, ruleset)
    assert set(report.per_radius) == {1, 2}
    assert report.per_radius[1] == 1.0 and report.per_radius[2] == 1.0


def test_workers_do_not_change_report():
    ruleset, samples = _toy_split(rule_count=4, samples_per_rule=5, seed=13)
    solo = evaluate(copy_last(), samples, ruleset, collect_error_maps=True, workers=1)
    pooled = evaluate(copy_last(), samples, ruleset, collect_error_maps=True, workers=4)
    assert solo.correct_cells == pooled.correct_cells
    assert solo.per_rule == pooled.per_rule
    assert solo.per_radius == pooled.per_radius
    assert solo.baseline_accuracies == pooled.baseline_accuracies
    assert solo.std_across_samples == pooled.std_across_samples
    assert all(np.array_equal(a, b) for a, b in zip(solo.error_maps, pooled.error_maps))


def test_contract_violation_names_sample():
    ruleset, samples = _toy_split()

    class Wrong:
        def predict(self, inputs):
            return np.zeros((2, 2), dtype=np.uint8)

    with pytest.raises(PredictorContractError, match="sample 0"):
        evaluate(Wrong(), samples, ruleset)


def test_nonbinary_output_rejected():
    ruleset, samples = _toy_split()

    class Grey:
        def predict(self, inputs):
            return np.full_like(inputs[-1], 2)

    with pytest.raises(PredictorContractError, match="binary"):
        evaluate(Grey(), samples, ruleset)


def test_empty_split_rejected():
    ruleset = sample_rules(1, 1, rng_seed=0)
    with pytest.raises(ValueError, match="empty"):
        evaluate(copy_last(), [], ruleset)


def test_binarize_ties_alive():
    frames = np.full((1, 2, 2), 0.5, dtype=np.float32)
    assert binarize_probabilities(frames).all()


def test_score_prediction_file_matches_evaluate(tmp_path):
    ruleset, samples = _toy_split(seed=21)
    bank = rulewise(oracle_predictor, ruleset)
    direct = evaluate(bank, samples, ruleset)
    frames = np.stack([bank[s.rule_id].predict(list(s.inputs)) for s in samples])
    path = tmp_path / "p.capr"
    write_predictions(path, frames)
    scored = score_prediction_file(path, samples, ruleset)
    assert scored.overall_accuracy == direct.overall_accuracy == 1.0
    assert scored.per_rule == direct.per_rule
    assert scored.per_radius == direct.per_radius
    assert scored.baseline_accuracies == direct.baseline_accuracies


def test_score_prediction_file_probability_mode(tmp_path):
    ruleset, samples = _toy_split(seed=22)
    probs = np.stack([s.target.astype(np.float32) * 0.8 + 0.1 for s in samples])
    path = tmp_path / "p.capr"
    write_predictions(path, probs)
    assert score_prediction_file(path, samples, ruleset).overall_accuracy == 1.0


def test_score_prediction_file_all_dead(tmp_path):
    ruleset, samples = _toy_split(seed=23)
    frames = np.zeros((len(samples),) + samples[0].target.shape, dtype=np.uint8)
    path = tmp_path / "p.capr"
    write_predictions(path, frames)
    report = score_prediction_file(path, samples, ruleset)
    dead_fraction = 1.0 - np.mean([s.target.mean() for s in samples])
    assert abs(report.overall_accuracy - dead_fraction) < 1e-12


def test_score_prediction_file_count_mismatch(tmp_path):
    ruleset, samples = _toy_split(seed=24)
    frames = np.zeros((len(samples) - 1,) + samples[0].target.shape, dtype=np.uint8)
    path = tmp_path / "p.capr"
    write_predictions(path, frames)
    with pytest.raises(FormatError, match="count"):
        score_prediction_file(path, samples, ruleset)


def test_score_prediction_file_dims_mismatch(tmp_path):
    ruleset, samples = _toy_split(seed=25)
    frames = np.zeros((len(samples), 3, 3), dtype=np.uint8)
    path = tmp_path / "p.capr"
    write_predictions(path, frames)
    with pytest.raises(FormatError, match="offset"):
        score_prediction_file(path, samples, ruleset)


def test_report_rendering(tmp_path):
    ruleset, samples = _toy_split(seed=26)
    report = evaluate(copy_last(), samples, ruleset, predictor_name="copy-last")
    text = format_report(report, per_rule=True)
    assert "overall accuracy" in text and "baseline constant" in text
    kv = format_report_kv(report, per_rule=True)
    assert "overall_accuracy=" in kv and "per_rule.0=" in kv
    path = tmp_path / "report.txt"
    write_report(report, path)
    parsed = dict(line.split("=", 1) for line in path.read_text().strip().splitlines())
    assert float(parsed["overall_accuracy"]) == report.overall_accuracy
