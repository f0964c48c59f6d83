"""Gradient-boosted trees with a smoothed quantile objective."""

from ._core import (
    DataError,
    Dataset,
    DegenerateLeafError,
    Ensemble,
    Error,
    IntervalReport,
    ObjectiveSpec,
    ParameterError,
    SchemaError,
    TrainConfig,
    cwc,
    empirical_quantile,
    evaluate_intervals,
    huber_norm,
    load_csv,
    pad_intervals,
    picp,
    pinaw,
    pinball_loss,
    quantile_huber_grad_hess,
    quantile_huber_loss,
    run_experiment,
    save_csv,
    simulate,
    train,
    train_test_split,
)

__version__ = "0.1.0"
