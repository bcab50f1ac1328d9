"""Score-style metrics: corridor rating, ISO-18571-flavoured combined score,
EEARTH-flavoured combined score, and the four-level grade table.

The ISO and EEARTH variants here are documented simplifications: the
published standards fix only the combination weights, so the sub-scores are
defined locally (see README) from the optimal shift, DTW-aligned L1 errors
and their first differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateCorridor, RatingOutOfRange
from ..series import SeriesPair
from .base import PsiStats, ShiftScan, cross_correlation, default_max_lag, psi_stats
from .combined import _require_energy
from .dtw import dtw_align

ISO_WEIGHTS = (0.4, 0.2, 0.2, 0.2)  # corridor, phase, magnitude, slope
EEARTH_WEIGHTS = (0.4, 0.4, 0.2)
CORRIDOR_DEFAULT = (0.05, 0.5)

GRADE_THRESHOLDS = (0.58, 0.8, 0.94)
GRADE_LABELS = ("Poor", "Fair", "Good", "Excellent")


@dataclass(frozen=True)
class Iso18571Scores:
    """Corridor (z), phase (p), magnitude (m) and slope (s) scores in [0, 1]
    with their fixed-weight combination r."""

    z: float
    p: float
    m: float
    s: float
    r: float

    def __post_init__(self) -> None:
        for v in (self.z, self.p, self.m, self.s, self.r):
            assert -1e-12 <= v <= 1.0 + 1e-12
        wz, wp, wm, ws = ISO_WEIGHTS
        expected = wz * self.z + wp * self.p + wm * self.m + ws * self.s
        assert abs(self.r - expected) < 1e-12


@dataclass(frozen=True)
class EearthScore:
    """Phase/magnitude/slope penalties on [0, 10] and the combined score."""

    p: float
    m: float
    s: float
    score: float


def grade(rating: float) -> tuple[int, str]:
    """Map a [0, 1] rating onto (rank, label) per the four-level table."""
    if not 0.0 <= rating <= 1.0:
        raise RatingOutOfRange(f"rating {rating} outside [0, 1]")
    t_poor, t_fair, t_good = GRADE_THRESHOLDS
    if rating > t_good:
        return 1, "Excellent"
    if rating > t_fair:
        return 2, "Good"
    if rating > t_poor:
        return 3, "Fair"
    return 4, "Poor"


def corridor_score(
    pair: SeriesPair,
    inner_frac: float = CORRIDOR_DEFAULT[0],
    outer_frac: float = CORRIDOR_DEFAULT[1],
) -> float:
    """Fraction of samples inside tolerance bands around the reference.

    Bands are ``+-inner_frac*A`` and ``+-outer_frac*A`` with ``A`` the
    reference peak amplitude; per-sample credit decays linearly between the
    inner and outer corridor.
    """
    if not 0.0 < inner_frac < outer_frac:
        raise ConfigError("corridor requires 0 < inner_frac < outer_frac")
    amplitude = float(np.max(np.abs(pair.y.v)))
    if amplitude == 0.0:
        raise DegenerateCorridor("reference peak amplitude is zero")
    dev = np.abs(pair.x.v - pair.y.v)
    inner = inner_frac * amplitude
    outer = outer_frac * amplitude
    per_sample = np.clip((outer - dev) / (outer - inner), 0.0, 1.0)
    return float(np.mean(per_sample))


def _resolve_lag_window(
    n: int, max_lag: int | None, window: int | None
) -> tuple[int, int]:
    """Fill unset lag/window arguments with the 10%-of-length default."""
    if max_lag is None:
        max_lag = default_max_lag(n)
    if window is None:
        window = default_max_lag(n)
    return max_lag, window


def _shift_by(pair: SeriesPair, n_star: int) -> tuple[np.ndarray, np.ndarray]:
    """Overlapping segments of x and y after removing the optimal shift."""
    x, y = pair.x.v, pair.y.v
    n = pair.n
    if n_star >= 0:
        return x[: n - n_star], y[n_star:]
    return x[-n_star:], y[: n + n_star]


def _rel_l1(a: np.ndarray, b: np.ndarray) -> float:
    """L1 error of a against b, relative to b; 0/0 counts as a perfect match."""
    num = float(np.sum(np.abs(a - b)))
    den = float(np.sum(np.abs(b)))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


@dataclass(frozen=True)
class _AlignedErrors:
    """Shift-compensated, DTW-warped relative errors shared by the combined
    scores: value error, slope error, and the correlation at the shift."""

    rho_star: float
    n_star: int
    max_lag: int
    value_rel_l1: float
    slope_rel_l1: float


def _aligned_errors(
    pair: SeriesPair,
    max_lag: int,
    window: int,
    stats: PsiStats,
    scan: ShiftScan | None = None,
) -> _AlignedErrors:
    _require_energy(stats)
    scan = scan or cross_correlation(pair, max_lag)
    xs, ys = _shift_by(pair, scan.n_star)

    warp = dtw_align(xs, ys, window=window)
    xw, yw = warp.warped(xs, ys)
    value_rel = _rel_l1(xw, yw)

    dx, dy = np.diff(xs), np.diff(ys)
    warp_d = dtw_align(dx, dy, window=window)
    dxw, dyw = warp_d.warped(dx, dy)
    slope_rel = _rel_l1(dxw, dyw)

    return _AlignedErrors(
        rho_star=scan.rho_max,
        n_star=scan.n_star,
        max_lag=max_lag,
        value_rel_l1=value_rel,
        slope_rel_l1=slope_rel,
    )


def combine_eearth(p: float, m: float, s: float, weights=EEARTH_WEIGHTS) -> float:
    w1, w2, w3 = weights
    if min(w1, w2, w3) < 0.0 or w1 + w2 + w3 > 1.0 + 1e-12:
        raise ConfigError("eearth weights must be >= 0 and sum to <= 1")
    return 10.0 - (w1 * p + w2 * m + w3 * s)


def eearth(
    pair: SeriesPair,
    weights=EEARTH_WEIGHTS,
    max_lag: int | None = None,
    window: int | None = None,
    _aligned: _AlignedErrors | None = None,
) -> EearthScore:
    """Weighted phase/magnitude/slope penalty subtracted from a 10-point scale.

    Phase maps the optimal-shift correlation onto [0, 10]; magnitude and
    slope are shift-compensated, DTW-warped relative L1 errors capped at 10.
    """
    if _aligned is None:
        max_lag, window = _resolve_lag_window(pair.n, max_lag, window)
        _aligned = _aligned_errors(pair, max_lag, window, psi_stats(pair))
    p = 5.0 * (1.0 - _aligned.rho_star)
    m = 10.0 * min(1.0, _aligned.value_rel_l1)
    s = 10.0 * min(1.0, _aligned.slope_rel_l1)
    return EearthScore(p=p, m=m, s=s, score=combine_eearth(p, m, s, weights))


def iso18571_scores(
    pair: SeriesPair,
    corridor: tuple[float, float] = CORRIDOR_DEFAULT,
    max_lag: int | None = None,
    window: int | None = None,
    _aligned: _AlignedErrors | None = None,
) -> Iso18571Scores:
    """Simplified ISO-18571-style rating: corridor, phase, magnitude and
    slope sub-scores combined as 0.4/0.2/0.2/0.2."""
    z = corridor_score(pair, *corridor)
    if _aligned is None:
        max_lag, window = _resolve_lag_window(pair.n, max_lag, window)
        _aligned = _aligned_errors(pair, max_lag, window, psi_stats(pair))
    p = 1.0 - min(1.0, abs(_aligned.n_star) / _aligned.max_lag)
    m = 1.0 - min(1.0, _aligned.value_rel_l1)
    s = 1.0 - min(1.0, _aligned.slope_rel_l1)
    wz, wp, wm, ws = ISO_WEIGHTS
    return Iso18571Scores(z=z, p=p, m=m, s=s, r=wz * z + wp * p + wm * m + ws * s)
