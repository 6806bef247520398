"""Minimum-power adversarial attack benchmark for a small modulation classifier.

The heavy lifting lives in the compiled extension module; this package
re-exports its public surface.
"""

from ._core import (  # noqa: F401
    AttackResult,
    ChannelConfig,
    Classifier,
    Dataset,
    Example,
    IQFrame,
    ModulationScheme,
    TrainStats,
    adversarial_accuracy,
    apply_channel,
    attack,
    avg_robustness,
    build_dataset,
    clean_accuracy,
    constellation,
    cross_entropy,
    flatten,
    forward,
    gen_clean_frame,
    grad_input,
    is_monotone_ray,
    load_dataset,
    load_model,
    mean_power,
    oracle_min_eps,
    predict,
    save_dataset,
    save_model,
    train_classifier,
)

__all__ = [
    "AttackResult",
    "ChannelConfig",
    "Classifier",
    "Dataset",
    "Example",
    "IQFrame",
    "ModulationScheme",
    "TrainStats",
    "adversarial_accuracy",
    "apply_channel",
    "attack",
    "avg_robustness",
    "build_dataset",
    "clean_accuracy",
    "constellation",
    "cross_entropy",
    "flatten",
    "forward",
    "gen_clean_frame",
    "grad_input",
    "is_monotone_ray",
    "load_dataset",
    "load_model",
    "mean_power",
    "oracle_min_eps",
    "predict",
    "save_dataset",
    "save_model",
    "train_classifier",
]
