"""Cell-wise scoring of predictors against dataset targets.

Accuracies accumulate as integer (correct, total) pairs and divide once,
so results are exact and independent of iteration or worker order.  Every
report carries the same-split baselines: the best constant predictor
("constant", the majority class of the targets), copy-last, and flip-all.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Sample
from .io import CAPR_COUNT_OFFSET, CAPR_DIMS_OFFSET, FormatError, read_predictions
from .rules import RuleSet

__all__ = [
    "PredictorContractError",
    "EvalReport",
    "accuracy",
    "error_map",
    "evaluate",
    "score_prediction_file",
    "binarize_probabilities",
    "format_report",
    "format_report_kv",
    "write_report",
]


class PredictorContractError(ValueError):
    """Predictor output violated the contract (shape or binary values)."""


def _check_shapes(predicted: np.ndarray, target: np.ndarray):
    if predicted.shape != target.shape:
        raise ValueError(f"shape mismatch: predicted {predicted.shape} vs target {target.shape}")


def accuracy(predicted, target) -> float:
    """Fraction of cells on which the two grids agree."""
    predicted = np.asarray(predicted)
    target = np.asarray(target)
    _check_shapes(predicted, target)
    return int((predicted == target).sum()) / predicted.size


def error_map(predicted, target) -> np.ndarray:
    """Cellwise exclusive-or: 1 marks a mispredicted cell."""
    predicted = np.asarray(predicted, dtype=np.uint8)
    target = np.asarray(target, dtype=np.uint8)
    _check_shapes(predicted, target)
    return np.bitwise_xor(predicted, target)


def binarize_probabilities(frames: np.ndarray) -> np.ndarray:
    """Threshold at 0.5, ties alive."""
    return (np.asarray(frames) >= 0.5).astype(np.uint8)


@dataclass
class EvalReport:
    correct_cells: int
    total_cells: int
    sample_count: int
    per_rule: dict[int, tuple[float, int]]  # rule_id -> (accuracy, sample count)
    per_radius: dict[int, float]
    baseline_accuracies: dict[str, float]
    std_across_rules: float
    std_across_samples: float
    error_maps: list[np.ndarray] | None = None
    predictor_name: str = ""

    @property
    def overall_accuracy(self) -> float:
        return self.correct_cells / self.total_cells


@dataclass
class _Tally:
    correct: int = 0
    total: int = 0
    samples: int = 0


def _resolve(predictor, rule_id: int):
    if isinstance(predictor, dict):
        try:
            return predictor[rule_id]
        except KeyError:
            raise PredictorContractError(f"no predictor for rule id {rule_id}") from None
    return predictor


def _check_output(out: np.ndarray, sample: Sample, index: int) -> np.ndarray:
    out = np.asarray(out)
    if out.shape != sample.target.shape:
        raise PredictorContractError(
            f"sample {index}: predictor output shape {out.shape} "
            f"!= target shape {sample.target.shape}"
        )
    if out.dtype != np.uint8:
        out = out.astype(np.uint8)
    if out.size and out.max() > 1:
        raise PredictorContractError(f"sample {index}: predictor output is not binary")
    return out


def _score_chunk(args):
    """Score a contiguous chunk of samples; returns integer tallies only."""
    predictor, samples, start, predictions, want_maps = args
    per_rule: dict[int, _Tally] = {}
    per_sample_acc: list[float] = []
    maps: list[np.ndarray] = []
    copy_correct = 0
    live_targets = 0
    for i, sample in enumerate(samples):
        index = start + i
        if predictions is None:
            out = _resolve(predictor, sample.rule_id).predict(list(sample.inputs))
        else:
            out = predictions[i]
        out = _check_output(out, sample, index)
        agree = int((out == sample.target).sum())
        size = sample.target.size
        tally = per_rule.setdefault(sample.rule_id, _Tally())
        tally.correct += agree
        tally.total += size
        tally.samples += 1
        per_sample_acc.append(agree / size)
        copy_correct += int((sample.inputs[-1] == sample.target).sum())
        live_targets += int(sample.target.sum())
        if want_maps:
            maps.append(np.bitwise_xor(out, sample.target))
    return per_rule, per_sample_acc, copy_correct, live_targets, maps


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, -(-n // workers))
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def evaluate(predictor, samples: list[Sample], ruleset: RuleSet, *,
             collect_error_maps: bool = False, workers: int = 1,
             predictor_name: str = "", _predictions: np.ndarray | None = None) -> EvalReport:
    """Score a predictor over one split.

    `predictor` is a PredictorContract or, for rule-aware predictors, a
    dict mapping rule_id to one.  `ruleset` is the table the split's
    rule_ids index into (per_radius aggregation needs the radii).
    """
    if not samples:
        raise ValueError("cannot evaluate an empty split")

    jobs = []
    for lo, hi in _chunks(len(samples), max(1, workers)):
        preds = None if _predictions is None else _predictions[lo:hi]
        jobs.append((predictor, samples[lo:hi], lo, preds, collect_error_maps))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_score_chunk, jobs))
    else:
        results = [_score_chunk(j) for j in jobs]

    per_rule_tally: dict[int, _Tally] = {}
    per_sample_acc: list[float] = []
    copy_correct = 0
    live_targets = 0
    maps: list[np.ndarray] = []
    for chunk_rules, chunk_accs, chunk_copy, chunk_live, chunk_maps in results:
        for rid, t in chunk_rules.items():
            agg = per_rule_tally.setdefault(rid, _Tally())
            agg.correct += t.correct
            agg.total += t.total
            agg.samples += t.samples
        per_sample_acc.extend(chunk_accs)
        copy_correct += chunk_copy
        live_targets += chunk_live
        maps.extend(chunk_maps)

    correct = sum(t.correct for t in per_rule_tally.values())
    total = sum(t.total for t in per_rule_tally.values())

    radius_tally: dict[int, _Tally] = {}
    for rid, t in per_rule_tally.items():
        rt = radius_tally.setdefault(ruleset[rid].radius, _Tally())
        rt.correct += t.correct
        rt.total += t.total

    per_rule = {rid: (t.correct / t.total, t.samples) for rid, t in sorted(per_rule_tally.items())}
    rule_accs = np.array([acc for acc, _ in per_rule.values()])

    baselines = {
        "constant": max(live_targets, total - live_targets) / total,
        "copy-last": copy_correct / total,
        "flip-all": (total - copy_correct) / total,
    }

    return EvalReport(
        correct_cells=correct,
        total_cells=total,
        sample_count=len(samples),
        per_rule=per_rule,
        per_radius={r: t.correct / t.total for r, t in sorted(radius_tally.items())},
        baseline_accuracies=baselines,
        std_across_rules=float(np.std(rule_accs)),
        std_across_samples=float(np.std(np.array(per_sample_acc))),
        error_maps=maps if collect_error_maps else None,
        predictor_name=predictor_name,
    )


def score_prediction_file(path, samples: list[Sample], ruleset: RuleSet, *,
                          collect_error_maps: bool = False, workers: int = 1) -> EvalReport:
    """Score a CAPR prediction file against a split, in dataset order."""
    preds = read_predictions(path)
    if preds.frames.shape[0] != len(samples):
        raise FormatError(
            f"prediction count {preds.frames.shape[0]} != split sample count {len(samples)}",
            offset=CAPR_COUNT_OFFSET,
        )
    if samples and preds.frames.shape[1:] != samples[0].target.shape:
        raise FormatError(
            f"prediction frames {preds.frames.shape[1:]} != grid {samples[0].target.shape}",
            offset=CAPR_DIMS_OFFSET,
        )
    frames = binarize_probabilities(preds.frames) if preds.mode == 1 else preds.frames
    return evaluate(None, samples, ruleset, collect_error_maps=collect_error_maps,
                    workers=workers, predictor_name=f"file:{path}", _predictions=frames)


# ---------------------------------------------------------------------------
# report rendering

def _pct(x: float) -> str:
    return f"{100.0 * x:6.2f}%"


def format_report(report: EvalReport, per_rule: bool = False) -> str:
    """Human-readable accuracy table."""
    lines = []
    if report.predictor_name:
        lines.append(f"predictor          {report.predictor_name}")
    lines += [
        f"samples            {report.sample_count}",
        f"overall accuracy   {_pct(report.overall_accuracy)}"
        f"  (std {100 * report.std_across_rules:.2f} across rules,"
        f" {100 * report.std_across_samples:.2f} across samples)",
    ]
    for radius, acc in report.per_radius.items():
        side = 2 * radius + 1
        lines.append(f"  {side}x{side} rules       {_pct(acc)}")
    for name, acc in report.baseline_accuracies.items():
        lines.append(f"baseline {name:<10}{_pct(acc)}")
    if per_rule:
        for rid, (acc, n) in report.per_rule.items():
            lines.append(f"  rule {rid:<4d} {_pct(acc)}  ({n} samples)")
    return "\n".join(lines)


def format_report_kv(report: EvalReport, per_rule: bool = False) -> str:
    """Machine-readable key=value lines."""
    lines = [
        f"predictor={report.predictor_name}",
        f"samples={report.sample_count}",
        f"correct_cells={report.correct_cells}",
        f"total_cells={report.total_cells}",
        f"overall_accuracy={report.overall_accuracy!r}",
        f"std_across_rules={report.std_across_rules!r}",
        f"std_across_samples={report.std_across_samples!r}",
    ]
    lines += [f"per_radius.{r}={acc!r}" for r, acc in report.per_radius.items()]
    lines += [f"baseline.{name}={acc!r}" for name, acc in report.baseline_accuracies.items()]
    if per_rule:
        lines += [
            f"per_rule.{rid}={acc!r},{n}" for rid, (acc, n) in report.per_rule.items()
        ]
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, path, per_rule: bool = False):
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_report_kv(report, per_rule=per_rule))
