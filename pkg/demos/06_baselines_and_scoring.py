"""Score predictors against ground truth and render an error map.

The oracle (which knows the rule) defines the 100% ceiling; the constant
predictor defines the floor around 51% on balanced data.  copy-last and
flip-all sit in between and expose the "static" and "alternating" rule
classes that are trivially predictable.
"""

import numpy as np

from calab import DatasetSpec, build
from calab.evaluation import error_map, evaluate, format_report
from calab.io import render_pbm, write_predictions
from calab.predictors import by_name, copy_last
from calab.evaluation import score_prediction_file

dataset = build(DatasetSpec(
    level="simple", grid_height=16, grid_width=16, k=3, steps_per_trajectory=6,
    configs_per_rule={"train": 2, "val": 1, "test": 2},
    train_rule_count=40, test_rule_count=40, master_seed=9,
))
samples = dataset.splits["test"]
ruleset = dataset.rules_for("test")

for name in ("oracle", "convnet", "copy-last", "flip-all", "constant"):
    predictor = by_name(name, ruleset, dataset.boundary)
    report = evaluate(predictor, samples, ruleset, predictor_name=name)
    print(f"{name:<10} {report.overall_accuracy:7.2%}")

# external predictions arrive as CAPR files and are scored identically
frames = np.stack([copy_last().predict(list(s.inputs)) for s in samples])
write_predictions("/tmp/copylast.capr", frames)
report = score_prediction_file("/tmp/copylast.capr", samples, ruleset)
print("\nfile-based scoring reproduces in-process scoring:")
print(format_report(report))

# where did copy-last go wrong on the first sample?
worst = max(range(len(samples)), key=lambda i: error_map(frames[i], samples[i].target).sum())
m = error_map(frames[worst], samples[worst].target)
render_pbm(m, "/tmp/worst_error_map.pbm")
print(f"\nworst sample {worst}: {int(m.sum())} wrong cells "
      f"-> /tmp/worst_error_map.pbm")
