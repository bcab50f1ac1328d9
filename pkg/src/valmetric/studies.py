"""Sensitivity studies: sweep one universe or pipeline hyperparameter,
refit the custom metric over many random splits, and aggregate the test
score into mean/variance curves.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .metrics import MetricConfig
from .pipeline import (
    DEFAULT_CORR_THRESHOLD,
    DEFAULT_TRAIN_FRACTION,
    LabeledDataset,
    compute_features,
    drop_correlated,
    split,
)
from .regress import fit_ols, score
from .universe import UniverseConfig, build_dataset

logger = logging.getLogger(__name__)

DEFAULT_REPEATS = 50

SWEEPABLE = (
    "measurement_noise",
    "n_simulations",
    "n_experts",
    "sigma_exp",
    "corr_threshold",
)

# default grids for the named study figures
FIGURE_SWEEPS: dict[str, tuple[str, tuple[float, ...]]] = {
    "fig7": ("measurement_noise", (0.0025, 0.01, 0.04)),
    "fig8": ("n_simulations", (2, 3, 5)),
    "fig9": ("n_experts", (2, 5, 10, 15)),
    "fig10": ("sigma_exp", (0.01, 0.05, 0.1, 0.2)),
    "fig11": ("corr_threshold", (0.8, 0.9, 0.99)),
}


@dataclass(frozen=True)
class StudyResult:
    """Mean/variance score curve for one swept parameter."""

    parameter: str
    values: tuple[float, ...]
    means: tuple[float, ...]
    variances: tuple[float, ...]
    repeats: int
    seed: int
    scores: tuple[tuple[float, ...], ...]  # [value][repeat]

    def __post_init__(self) -> None:
        assert self.repeats >= 1
        assert all(v >= 0.0 for v in self.variances)
        assert len(self.values) == len(self.means) == len(self.variances)
        assert all(len(s) == self.repeats for s in self.scores)

    def to_json_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "values": list(self.values),
            "means": list(self.means),
            "variances": list(self.variances),
            "repeats": self.repeats,
            "seed": self.seed,
            "scores": [list(s) for s in self.scores],
        }

    def save_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    def save_csv(self, path: str | Path) -> None:
        """Tidy long-format CSV for external plotting."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["parameter", "value", "repeat", "score"])
            for value, per_repeat in zip(self.values, self.scores):
                for r, s in enumerate(per_repeat):
                    writer.writerow(
                        [self.parameter, repr(float(value)), r, repr(float(s))]
                    )


def repeated_scores(
    dataset: LabeledDataset,
    repeats: int = DEFAULT_REPEATS,
    seed: int | tuple[int, ...] = 0,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    corr_threshold: float = DEFAULT_CORR_THRESHOLD,
    metric_config: MetricConfig | None = None,
) -> np.ndarray:
    """Test scores over ``repeats`` independent pair-level splits.

    Features are computed once; each repeat re-splits, prunes correlated
    columns on its training half, refits OLS and scores the held-out half.
    """
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    base = (seed,) if isinstance(seed, int) else tuple(seed)
    fm = compute_features(dataset, metric_config)
    out = np.empty(repeats)
    for r in range(repeats):
        train, test = split(fm, train_fraction, seed=(*base, r))
        train = drop_correlated(train, corr_threshold)
        model = fit_ols(train)
        out[r] = score(model, test)
    return out


def repeated_score(
    dataset: LabeledDataset,
    repeats: int = DEFAULT_REPEATS,
    seed: int | tuple[int, ...] = 0,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    corr_threshold: float = DEFAULT_CORR_THRESHOLD,
    metric_config: MetricConfig | None = None,
) -> tuple[float, float]:
    """Mean and variance of the test score over repeated random splits."""
    scores = repeated_scores(
        dataset, repeats, seed, train_fraction, corr_threshold, metric_config
    )
    return float(scores.mean()), float(scores.var())


def _config_for(base: UniverseConfig, parameter: str, value: float) -> UniverseConfig:
    if parameter == "measurement_noise":
        return replace(base, sigma_measurement=float(value))
    if parameter == "n_simulations":
        n = int(value)
        if n != value or n < 1:
            raise ConfigError(f"n_simulations must be a positive integer, got {value}")
        grid = tuple(float(v) for v in np.linspace(0.95, 1.15, n))
        return replace(base, k_grid=grid, d_grid=grid)
    if parameter == "n_experts":
        n = int(value)
        if n != value or n < 1:
            raise ConfigError(f"n_experts must be a positive integer, got {value}")
        return replace(base, n_experts=n)
    if parameter == "sigma_exp":
        if value < 0.0:
            raise ConfigError("sigma_exp must be >= 0")
        return replace(base, sigma_exp=float(value))
    raise ConfigError(f"unknown sweep parameter {parameter!r}")


def sweep(
    parameter: str,
    values: tuple[float, ...],
    base_config: UniverseConfig,
    repeats: int = DEFAULT_REPEATS,
    seed: int | None = None,
    corr_threshold: float = DEFAULT_CORR_THRESHOLD,
) -> StudyResult:
    """Score curve over one hyperparameter, everything else held fixed.

    Universe parameters rebuild the dataset per value; ``corr_threshold``
    reuses one dataset and varies only the pipeline.
    """
    if parameter not in SWEEPABLE:
        raise ConfigError(f"parameter must be one of {SWEEPABLE}, got {parameter!r}")
    if not values:
        raise ConfigError("values must be non-empty")
    seed = base_config.seed if seed is None else seed

    base_dataset = None
    if parameter == "corr_threshold":
        base_dataset = build_dataset(base_config).dataset

    all_scores: list[tuple[float, ...]] = []
    means: list[float] = []
    variances: list[float] = []
    for vi, value in enumerate(values):
        if parameter == "corr_threshold":
            if not 0.0 < value <= 1.0:
                raise ConfigError("corr_threshold must be in (0, 1]")
            dataset, threshold = base_dataset, float(value)
        else:
            dataset = build_dataset(_config_for(base_config, parameter, value)).dataset
            threshold = corr_threshold
        scores = repeated_scores(
            dataset,
            repeats=repeats,
            seed=(seed, vi),
            corr_threshold=threshold,
        )
        logger.info(
            "%s = %g: mean %.4f var %.6f", parameter, value, scores.mean(), scores.var()
        )
        all_scores.append(tuple(float(s) for s in scores))
        means.append(float(scores.mean()))
        variances.append(float(scores.var()))

    return StudyResult(
        parameter=parameter,
        values=tuple(float(v) for v in values),
        means=tuple(means),
        variances=tuple(variances),
        repeats=repeats,
        seed=seed,
        scores=tuple(all_scores),
    )
