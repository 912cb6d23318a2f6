"""Incremental multi-class identification with self-paced and active labeling."""

from .core import (
    ClassifierBank,
    DomainError,
    EngineConfig,
    FeatureStore,
    LabelState,
    WeightMatrix,
    decision_value,
    hinge_loss,
    total_objective,
)
from .engine import Engine, RunLedger, generate_synthetic, rank1_accuracy, update_pace
from .experiments import ExperimentSpec, run_experiment, run_single
from .pseudolabel import pseudo_label_batch, select_high_confidence, solve_label_assignment
from .query import OracleAnswer, SimulatedOracle, select_low_confidence
from .selfpaced import regularizer_value, spl_weight, update_weights
from .svm import BinaryProblem, train_one_vs_all, train_weighted_binary

__all__ = [
    "ClassifierBank",
    "DomainError",
    "EngineConfig",
    "FeatureStore",
    "LabelState",
    "WeightMatrix",
    "decision_value",
    "hinge_loss",
    "total_objective",
    "Engine",
    "RunLedger",
    "generate_synthetic",
    "rank1_accuracy",
    "update_pace",
    "ExperimentSpec",
    "run_experiment",
    "run_single",
    "pseudo_label_batch",
    "select_high_confidence",
    "solve_label_assignment",
    "OracleAnswer",
    "SimulatedOracle",
    "select_low_confidence",
    "regularizer_value",
    "spl_weight",
    "update_weights",
    "BinaryProblem",
    "train_one_vs_all",
    "train_weighted_binary",
]
