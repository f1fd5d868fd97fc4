"""calab: a rule-space laboratory for 2-D Born/Stay cellular automata.

Generate random rule sets over variable-size Moore neighborhoods, simulate
trajectories (reference and bit-packed engines), build generalization
datasets, recover rules from observations, and score predictors against
ground-truth evolution.
"""

from .rules import (
    Rule,
    RuleSet,
    NotationError,
    NotationRangeError,
    moore_max_count,
    parse_notation,
    format_notation,
    sample_rules,
)
from .engine import (
    BOUNDARIES,
    Trajectory,
    neighbor_count,
    neighbor_counts,
    step,
    step_packed,
    simulate,
)
from .dataset import (
    Dataset,
    DatasetSpec,
    Sample,
    sample_initial,
    slice_trajectory,
    build,
    verify,
)
from .inference import (
    TransitionEvidence,
    InconsistencyError,
    observe,
    infer_rule,
    infer_smallest_radius,
)
from .predictors import (
    oracle_predictor,
    copy_last,
    flip_all,
    constant_majority,
    ConstructedConvNet,
    build_constructed_net,
    forward,
)
from .evaluation import (
    EvalReport,
    accuracy,
    error_map,
    evaluate,
    score_prediction_file,
)

__version__ = "0.1.0"

__all__ = [
    "Rule", "RuleSet", "NotationError", "NotationRangeError",
    "moore_max_count", "parse_notation", "format_notation", "sample_rules",
    "BOUNDARIES", "Trajectory", "neighbor_count", "neighbor_counts",
    "step", "step_packed", "simulate",
    "Dataset", "DatasetSpec", "Sample", "sample_initial",
    "slice_trajectory", "build", "verify",
    "TransitionEvidence", "InconsistencyError", "observe", "infer_rule",
    "infer_smallest_radius",
    "oracle_predictor", "copy_last", "flip_all", "constant_majority",
    "ConstructedConvNet", "build_constructed_net", "forward",
    "EvalReport", "accuracy", "error_map", "evaluate", "score_prediction_file",
    "__version__",
]
