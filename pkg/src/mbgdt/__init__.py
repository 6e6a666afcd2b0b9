"""Robust polynomial regression via loss-trimmed mini-batch gradient descent.

The trimmed estimator drops the highest-loss share of every mini-batch before
the gradient step, which keeps far-off adversarial samples from steering the
fit; combined with a Huber training loss it stays close to the truth under
heavy contamination while matching the plain baseline on clean data.
"""

from .core import (
    ConfigError,
    Dataset,
    DegenerateDataError,
    DivergenceError,
    LossKind,
    MbgdtError,
    ModelConfig,
    Sample,
    ScaleParams,
    featurize,
    feature_matrix,
    predict,
    scale_x,
)
from .loss import batch_gradient, batch_losses, huber_loss, loss_derivative, squared_loss
from .optimizer import FitInstrument, FitResult, TrainTrace, fit, fit_pair, select_batch, trim_indices
from .preprocess import DbscanConfig, KernelConfig, dbscan_trim, default_kernel_config, kernel_preprocess, region_query
from .datagen import (
    DEFAULT_CURVE,
    ContaminationSpec,
    Family,
    NonUniformCase,
    NonUniformSpec,
    TrueCurve,
    contaminate,
    gen_nonuniform,
    gen_test,
    gen_true,
)
from .bench import ArmStats, RepeatedResult, Scenario, SweepParam, SweepTable, TrialResult, mse, run_repeated, run_trial, sweep

__all__ = [
    "ArmStats", "ConfigError", "ContaminationSpec", "DEFAULT_CURVE", "Dataset",
    "DbscanConfig", "DegenerateDataError", "DivergenceError", "Family",
    "FitInstrument", "FitResult", "KernelConfig", "LossKind", "MbgdtError",
    "ModelConfig", "NonUniformCase", "NonUniformSpec", "RepeatedResult",
    "Sample", "ScaleParams", "Scenario", "SweepParam", "SweepTable",
    "TrainTrace", "TrialResult", "TrueCurve", "batch_gradient", "batch_losses",
    "contaminate", "dbscan_trim", "default_kernel_config", "featurize",
    "feature_matrix", "fit", "fit_pair", "gen_nonuniform", "gen_test",
    "gen_true", "huber_loss", "kernel_preprocess", "loss_derivative", "mse",
    "predict", "region_query", "run_repeated", "run_trial", "scale_x",
    "select_batch", "squared_loss", "sweep", "trim_indices",
]

__version__ = "0.1.0"
