"""Fit the custom rating metric R = sum(w_i * f_i) + intercept by ordinary
least squares or LASSO, score it on held-out data, and attach prediction
intervals.

Features are standardized (zero mean, unit scale) before fitting; the
transform is stored on the model so raw-space coefficients and predictions
stay available.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import stats

from .errors import (
    ConfigError,
    MissingFeature,
    NonConvergence,
    TooFewRows,
    ZeroVariance,
)
from .pipeline import FeatureMatrix

logger = logging.getLogger(__name__)

LASSO_MAX_SWEEPS = 100_000
LASSO_TOL = 1e-10
NORMAL_APPROX_ABOVE = 30  # simple interval switches to the z quantile


@dataclass(frozen=True)
class CustomMetricModel:
    """Fitted linear rating model plus everything prediction needs.

    ``weights[0]`` is the intercept; ``weights[1:]`` follow
    ``feature_names`` and act on standardized features.
    """

    feature_names: tuple[str, ...]
    weights: np.ndarray
    sigma_train: float
    n: int
    p: int
    xtx_inv: np.ndarray
    feature_means: np.ndarray
    feature_scales: np.ndarray
    strategy: str
    seed: int | None = None

    def __post_init__(self) -> None:
        assert self.sigma_train >= 0.0
        assert len(self.weights) == len(self.feature_names) + 1
        assert self.p == len(self.feature_names)
        assert self.xtx_inv.shape == (self.p + 1, self.p + 1)
        assert np.allclose(self.xtx_inv, self.xtx_inv.T, atol=1e-9)
        for arr in (self.weights, self.xtx_inv, self.feature_means, self.feature_scales):
            arr.setflags(write=False)

    @property
    def intercept(self) -> float:
        return float(self.weights[0])

    def raw_coefficients(self) -> tuple[float, dict[str, float]]:
        """Intercept and per-feature weights in the original feature units."""
        w = self.weights[1:] / self.feature_scales
        intercept = self.intercept - float(np.dot(w, self.feature_means))
        return intercept, dict(zip(self.feature_names, (float(v) for v in w)))

    def standardize(self, features: Mapping[str, float] | np.ndarray) -> np.ndarray:
        if isinstance(features, Mapping):
            try:
                raw = np.array([features[n] for n in self.feature_names], dtype=float)
            except KeyError as exc:
                raise MissingFeature(f"feature {exc.args[0]!r} not provided") from None
        else:
            raw = np.asarray(features, dtype=float)
            if raw.shape != (self.p,):
                raise MissingFeature(
                    f"expected {self.p} feature values, got shape {raw.shape}"
                )
        return (raw - self.feature_means) / self.feature_scales

    def predict_center(self, features: Mapping[str, float] | np.ndarray) -> float:
        return self.intercept + float(np.dot(self.weights[1:], self.standardize(features)))

    def to_json_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "intercept": self.intercept,
            "weights": [float(v) for v in self.weights[1:]],
            "sigma_train": self.sigma_train,
            "n": self.n,
            "p": self.p,
            "xtx_inv": [float(v) for v in self.xtx_inv.ravel()],
            "standardization": {
                "means": [float(v) for v in self.feature_means],
                "scales": [float(v) for v in self.feature_scales],
            },
            "strategy": self.strategy,
            "seed": self.seed,
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, doc: dict) -> CustomMetricModel:
        p = int(doc["p"])
        return cls(
            feature_names=tuple(doc["feature_names"]),
            weights=np.array([doc["intercept"], *doc["weights"]], dtype=float),
            sigma_train=float(doc["sigma_train"]),
            n=int(doc["n"]),
            p=p,
            xtx_inv=np.array(doc["xtx_inv"], dtype=float).reshape(p + 1, p + 1),
            feature_means=np.array(doc["standardization"]["means"], dtype=float),
            feature_scales=np.array(doc["standardization"]["scales"], dtype=float),
            strategy=doc["strategy"],
            seed=doc["seed"],
        )

    @classmethod
    def load(cls, path: str | Path) -> CustomMetricModel:
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class PredictionInterval:
    """Predicted rating with simple (1-D) and full (design-aware) bounds."""

    center: float
    lo_simple: float
    hi_simple: float
    lo_full: float
    hi_full: float
    alpha: float

    def __post_init__(self) -> None:
        assert self.lo_simple <= self.center <= self.hi_simple
        assert self.lo_full <= self.center <= self.hi_full

    @property
    def simple_width(self) -> float:
        return self.hi_simple - self.lo_simple

    @property
    def full_width(self) -> float:
        return self.hi_full - self.lo_full


def _standardized_design(fm: FeatureMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Column means, scales, and the standardized design with leading 1s."""
    means = fm.x.mean(axis=0)
    scales = fm.x.std(axis=0)
    scales = np.where(scales == 0.0, 1.0, scales)  # constant column stays zero
    design = np.hstack(
        [np.ones((fm.n_rows, 1)), (fm.x - means) / scales]
    )
    return means, scales, design


def _finish_fit(
    fm: FeatureMatrix,
    design: np.ndarray,
    means: np.ndarray,
    scales: np.ndarray,
    strategy: str,
    seed: int | None,
) -> CustomMetricModel:
    """Least-squares solve on a prepared design plus the shared bookkeeping."""
    n, cols = design.shape
    p = cols - 1
    if n <= cols:
        raise TooFewRows(f"{n} rows cannot determine {cols} coefficients")

    weights, _, rank, _ = np.linalg.lstsq(design, fm.y, rcond=None)
    gram = design.T @ design
    if rank < cols:
        logger.warning(
            "rank-deficient design (rank %d < %d); using pseudo-inverse", rank, cols
        )
        xtx_inv = np.linalg.pinv(gram)
    else:
        xtx_inv = np.linalg.inv(gram)
    xtx_inv = (xtx_inv + xtx_inv.T) / 2.0  # keep the invariant exact

    resid = fm.y - design @ weights
    sigma2 = float(resid @ resid) / (n - p - 1)
    return CustomMetricModel(
        feature_names=fm.feature_names,
        weights=weights,
        sigma_train=float(np.sqrt(max(sigma2, 0.0))),
        n=n,
        p=p,
        xtx_inv=xtx_inv,
        feature_means=means.copy(),
        feature_scales=scales.copy(),
        strategy=strategy,
        seed=seed,
    )


def fit_ols(train: FeatureMatrix, seed: int | None = None) -> CustomMetricModel:
    """Ordinary least squares on standardized features with an intercept."""
    means, scales, design = _standardized_design(train)
    return _finish_fit(train, design, means, scales, "ols", seed)


def _coordinate_descent(
    x: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float = LASSO_TOL,
    max_sweeps: int = LASSO_MAX_SWEEPS,
) -> np.ndarray:
    """LASSO on standardized columns (unit second moment, centered y)."""
    n, p = x.shape
    w = np.zeros(p)
    resid = y.copy()
    col_sq = (x * x).sum(axis=0) / n
    for sweep in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            rho = float(x[:, j] @ resid) / n + col_sq[j] * w[j]
            new = np.sign(rho) * max(abs(rho) - lam, 0.0) / col_sq[j]
            if new != w[j]:
                resid += x[:, j] * (w[j] - new)
                delta = max(delta, abs(new - w[j]))
                w[j] = new
        if delta < tol:
            return w
    raise NonConvergence(
        f"lasso did not converge within {max_sweeps} sweeps",
        iterations=max_sweeps,
    )


def lasso_lambda_max(train: FeatureMatrix) -> float:
    """Smallest penalty that zeroes every coefficient."""
    means, scales, design = _standardized_design(train)
    x = design[:, 1:]
    yc = train.y - train.y.mean()
    return float(np.max(np.abs(x.T @ yc))) / train.n_rows


def _cv_lambda(x: np.ndarray, yc: np.ndarray, folds: int = 5, grid: int = 20) -> float:
    """Deterministic k-fold choice of the penalty over a log grid."""
    n = x.shape[0]
    lam_max = float(np.max(np.abs(x.T @ yc))) / n
    if lam_max == 0.0:
        return 0.0
    lambdas = np.geomspace(lam_max, lam_max * 1e-3, grid)
    assignment = np.arange(n) % folds  # round-robin, order-stable
    best_lam, best_mse = float(lambdas[0]), np.inf
    for lam in lambdas:
        mse = 0.0
        for k in range(folds):
            hold = assignment == k
            w = _coordinate_descent(
                x[~hold], yc[~hold], float(lam), tol=1e-7, max_sweeps=5000
            )
            err = yc[hold] - x[hold] @ w
            mse += float(err @ err)
        if mse < best_mse - 1e-15:
            best_mse, best_lam = mse, float(lam)
    return best_lam


def fit_lasso(
    train: FeatureMatrix,
    lam: float | str = "cv",
    seed: int | None = None,
) -> CustomMetricModel:
    """Coordinate-descent LASSO for selection, then an OLS refit on the
    surviving features for the reported weights and residual variance.
    """
    means, scales, design = _standardized_design(train)
    x = design[:, 1:]
    y_mean = float(train.y.mean())
    yc = train.y - y_mean

    if isinstance(lam, str):
        if lam != "cv":
            raise ConfigError(f"lambda must be a number or 'cv', got {lam!r}")
        lam_value = _cv_lambda(x, yc)
    else:
        lam_value = float(lam)
        if lam_value < 0.0:
            raise ConfigError("lambda must be >= 0")

    w = _coordinate_descent(x, yc, lam_value)
    # 1e-12 on unit-variance columns is fp dust, e.g. from duplicate columns
    support = tuple(
        name for name, wj in zip(train.feature_names, w) if abs(wj) > 1e-12
    )
    logger.info(
        "lasso(lambda=%.6g) kept %d of %d features", lam_value, len(support), len(w)
    )
    if not support:
        # intercept-only model: mean prediction with its own uncertainty
        n = train.n_rows
        resid = yc
        sigma2 = float(resid @ resid) / (n - 1)
        return CustomMetricModel(
            feature_names=(),
            weights=np.array([y_mean]),
            sigma_train=float(np.sqrt(max(sigma2, 0.0))),
            n=n,
            p=0,
            xtx_inv=np.array([[1.0 / n]]),
            feature_means=np.empty(0),
            feature_scales=np.empty(0),
            strategy="lasso",
            seed=seed,
        )

    sub = train.select(support)
    sub_means, sub_scales, sub_design = _standardized_design(sub)
    return _finish_fit(sub, sub_design, sub_means, sub_scales, "lasso", seed)


def _quantile(alpha: float, dof: int, normal_ok: bool) -> float:
    if normal_ok and dof > NORMAL_APPROX_ABOVE:
        return float(stats.norm.ppf(1.0 - alpha / 2.0))
    return float(stats.t.ppf(1.0 - alpha / 2.0, dof))


def predict(
    model: CustomMetricModel,
    features: Mapping[str, float] | np.ndarray,
    alpha: float = 0.05,
) -> PredictionInterval:
    """Point prediction with simple and design-aware prediction intervals.

    The simple interval ignores the design (t with n-2 degrees of freedom,
    normal above 30); the full interval widens with the leverage of the
    query point. The center is intentionally not clamped to [0, 1].
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    z = model.standardize(features)
    center = model.intercept + float(np.dot(model.weights[1:], z))

    half_simple = model.sigma_train * _quantile(alpha, model.n - 2, normal_ok=True)

    x_tilde = np.concatenate([[1.0], z])
    leverage = float(x_tilde @ model.xtx_inv @ x_tilde)
    half_full = np.sqrt(model.sigma_train**2 * (1.0 + leverage)) * _quantile(
        alpha, model.n - model.p - 1, normal_ok=False
    )

    return PredictionInterval(
        center=center,
        lo_simple=center - half_simple,
        hi_simple=center + half_simple,
        lo_full=center - half_full,
        hi_full=center + half_full,
        alpha=alpha,
    )


def score(model: CustomMetricModel, test: FeatureMatrix) -> float:
    """Coefficient of determination of the model on held-out rows."""
    if test.n_rows == 0:
        raise TooFewRows("test matrix is empty")
    try:
        idx = [test.feature_names.index(n) for n in model.feature_names]
    except ValueError as exc:
        raise MissingFeature(str(exc)) from None
    z = (test.x[:, idx] - model.feature_means) / model.feature_scales
    pred = model.intercept + z @ model.weights[1:]
    centered = test.y - test.y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        raise ZeroVariance("test labels are constant")
    resid = test.y - pred
    return 1.0 - float(resid @ resid) / ss_tot
