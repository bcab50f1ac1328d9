"""Pointwise error measures and signal energy/correlation statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, LagOutOfRange, ZeroMean, ZeroRange, ZeroVariance
from ..series import SeriesPair

RHO_SLACK = 1e-12  # tolerated Cauchy-Schwarz overshoot in floating point


@dataclass(frozen=True)
class PsiStats:
    """Mean-square and cross terms of a pair, in signal-units squared."""

    psi_xx: float
    psi_yy: float
    psi_xy: float

    def __post_init__(self) -> None:
        assert self.psi_xx >= 0.0 and self.psi_yy >= 0.0
        bound = self.psi_xx * self.psi_yy
        assert self.psi_xy**2 <= bound * (1.0 + 1e-9) + 1e-300


@dataclass(frozen=True)
class ShiftScan:
    """Normalized cross-correlation over a symmetric window of sample shifts.

    ``n_star`` is the lag with maximal correlation; ties resolve toward the
    smallest absolute lag. Positive lag means the reference must be advanced
    to line up with the test signal.
    """

    lags: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    n_star: int

    def __post_init__(self) -> None:
        assert np.all(np.abs(self.rho) <= 1.0 + RHO_SLACK)
        assert self.rho_at(self.n_star) >= np.max(self.rho) - 1e-15

    def rho_at(self, lag: int) -> float:
        idx = np.searchsorted(self.lags, lag)
        if idx >= self.lags.size or self.lags[idx] != lag:
            raise LagOutOfRange(f"lag {lag} not scanned")
        return float(self.rho[idx])

    @property
    def rho_max(self) -> float:
        return self.rho_at(self.n_star)


def psi_stats(pair: SeriesPair) -> PsiStats:
    """Mean-square terms sum(x*x)/N, sum(y*y)/N and cross term sum(x*y)/N."""
    x, y = pair.x.v, pair.y.v
    n = pair.n
    return PsiStats(
        psi_xx=float(np.dot(x, x) / n),
        psi_yy=float(np.dot(y, y) / n),
        psi_xy=float(np.dot(x, y) / n),
    )


def rmse(pair: SeriesPair) -> float:
    d = pair.x.v - pair.y.v
    return float(np.sqrt(np.dot(d, d) / pair.n))


def nrmse(pair: SeriesPair, normalizer: str = "range") -> float:
    """RMSE divided by the reference range (default) or the reference mean."""
    value = rmse(pair)
    y = pair.y.v
    if normalizer == "range":
        span = float(np.max(y) - np.min(y))
        if span <= 0.0:
            raise ZeroRange("reference signal has zero range")
        return value / span
    if normalizer == "mean":
        mean = float(np.mean(y))
        if mean == 0.0:
            raise ZeroMean("reference signal has zero mean")
        return value / mean
    raise ConfigError(f"unknown normalizer {normalizer!r}")


def pearson(pair: SeriesPair) -> float:
    """Coefficient of correlation between the centered signals."""
    x = pair.x.v - np.mean(pair.x.v)
    y = pair.y.v - np.mean(pair.y.v)
    sx = float(np.dot(x, x))
    sy = float(np.dot(y, y))
    if sy == 0.0:
        raise ZeroVariance("reference signal is constant")
    if sx == 0.0:
        raise ZeroVariance("test signal is constant")
    return float(np.dot(x, y) / np.sqrt(sx * sy))


def abs_errors(pair: SeriesPair) -> dict[str, float]:
    """mae, mse, medae and maxae; defined for every valid pair."""
    err = np.abs(pair.y.v - pair.x.v)
    return {
        "mae": float(np.mean(err)),
        "mse": float(np.mean(err**2)),
        "medae": float(np.median(err)),
        "maxae": float(np.max(err)),
    }


def variance_scores(pair: SeriesPair) -> dict[str, float]:
    """r2, frac_explained_abs and explained_variance against the reference."""
    x, y = pair.x.v, pair.y.v
    centered = y - np.mean(y)
    ss_tot = float(np.dot(centered, centered))
    if ss_tot == 0.0:
        raise ZeroVariance("reference signal is constant")
    resid = y - x
    return {
        "r2": 1.0 - float(np.dot(resid, resid)) / ss_tot,
        "frac_explained_abs": 1.0
        - float(np.sum(np.abs(resid))) / float(np.sum(np.abs(centered))),
        "explained_variance": 1.0 - float(np.var(resid)) / float(np.var(y)),
    }


def basic_errors(pair: SeriesPair) -> dict[str, float]:
    """The plain regression-style error measures of one pair.

    Returns mae, mse, medae, maxae, r2, frac_explained_abs,
    explained_variance and pearson under those keys.
    """
    return {**abs_errors(pair), **variance_scores(pair), "pearson": pearson(pair)}


def default_max_lag(n: int, fraction: float = 0.1) -> int:
    """Scanned lag half-width: ``fraction`` of the pair length, at least 1."""
    return min(n - 1, max(1, int(round(fraction * n))))


def cross_correlation(pair: SeriesPair, max_lag: int) -> ShiftScan:
    """Scan normalized cross-correlation over lags ``-max_lag..max_lag``.

    Outside the overlap the shifted signal is treated as zero, so every
    correlation stays within [-1, 1] up to rounding.
    """
    n = pair.n
    if not 0 <= max_lag < n:
        raise LagOutOfRange(f"max_lag {max_lag} not in [0, {n})")
    x, y = pair.x.v, pair.y.v
    energy = np.sqrt(np.dot(x, x) * np.dot(y, y))
    lags = np.arange(-max_lag, max_lag + 1)
    rho = np.empty(lags.size)
    for i, lag in enumerate(lags):
        if lag >= 0:
            s = np.dot(x[: n - lag], y[lag:])
        else:
            s = np.dot(x[-lag:], y[: n + lag])
        rho[i] = s / energy if energy > 0.0 else 0.0

    # ties toward the smallest |lag|, preferring the negative one on a draw
    order = np.lexsort((lags, np.abs(lags)))
    best = order[int(np.argmax(rho[order] == np.max(rho)))]
    return ShiftScan(lags=lags, rho=rho, n_star=int(lags[best]))
