"""Hybrid residual encoder-decoder trainer for 2-D cellular automata.

Consumes CADS dataset files, trains a fully convolutional residual U-Net
to predict the next CA state, and exports CAPR probability files for the
laboratory's evaluator.
"""

from .formats import CadsFile, SplitData, read_cads, read_spec_config, write_capr
from .model import HybridResUNet, ModelConfig, build_model, count_parameters
from .training import (
    EpochStats,
    TrainResult,
    load_checkpoint,
    predict_probabilities,
    predict_to_file,
    threshold_accuracy,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CadsFile", "SplitData", "read_cads", "read_spec_config", "write_capr",
    "HybridResUNet", "ModelConfig", "build_model", "count_parameters",
    "EpochStats", "TrainResult", "train", "load_checkpoint",
    "predict_probabilities", "predict_to_file", "threshold_accuracy",
    "__version__",
]
