"""GD-SSM constructions, reference oracles, training and metrics."""

from ._gdssm import (
    ConfigError,
    Model,
    NonFiniteLoss,
    Task,
    constructed_model,
    eval_loss,
    gd_predict,
    init_model,
    load_model,
    lsa_predict,
    newton_predict,
    run,
    sample_tasks,
    tasks_from_csv,
    tasks_to_csv,
    train,
    tune_gd_eta,
    weighted_outer_sum,
)

__all__ = [
    "ConfigError",
    "Model",
    "NonFiniteLoss",
    "Task",
    "constructed_model",
    "eval_loss",
    "gd_predict",
    "init_model",
    "load_model",
    "lsa_predict",
    "newton_predict",
    "run",
    "sample_tasks",
    "tasks_from_csv",
    "tasks_to_csv",
    "train",
    "tune_gd_eta",
    "weighted_outer_sum",
]
