"""Validation workbench for simulation-versus-measurement time series:
signal metrics, expert-rating datasets, and fitted custom quality metrics.
"""

from . import errors, metrics
from .pipeline import (
    FeatureMatrix,
    LabeledDataset,
    LabeledPair,
    compute_features,
    drop_correlated,
    split,
)
from .regress import (
    CustomMetricModel,
    PredictionInterval,
    fit_lasso,
    fit_ols,
    predict,
    score,
)
from .series import SeriesPair, TimeSeries, align_pair, load_series, make_pair

__version__ = "0.1.0"

__all__ = [
    "CustomMetricModel",
    "FeatureMatrix",
    "LabeledDataset",
    "LabeledPair",
    "PredictionInterval",
    "SeriesPair",
    "TimeSeries",
    "align_pair",
    "compute_features",
    "drop_correlated",
    "errors",
    "fit_lasso",
    "fit_ols",
    "load_series",
    "make_pair",
    "metrics",
    "predict",
    "score",
    "split",
    "__version__",
]
