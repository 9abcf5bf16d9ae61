"""Qubit-neuron network evolution for workload forecasting."""

from ._qevo import (
    Architecture,
    Genome,
    QevoError,
    aggregate,
    build_windows,
    denormalize,
    fit_normalizer,
    mae,
    mape,
    normalize,
    parse_trace,
    predict_files,
    rmse,
    select_strategy,
    synthetic_series,
    train,
    train_files,
    update_probabilities,
)

__all__ = [
    "Architecture",
    "Genome",
    "QevoError",
    "aggregate",
    "build_windows",
    "denormalize",
    "fit_normalizer",
    "mae",
    "mape",
    "normalize",
    "parse_trace",
    "predict_files",
    "rmse",
    "select_strategy",
    "synthetic_series",
    "train",
    "train_files",
    "update_probabilities",
]
