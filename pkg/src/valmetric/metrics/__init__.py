"""Similarity and error metrics for aligned time-series pairs."""

from .base import (
    PsiStats,
    ShiftScan,
    abs_errors,
    basic_errors,
    cross_correlation,
    default_max_lag,
    nrmse,
    pearson,
    psi_stats,
    rmse,
    variance_scores,
)
from .combined import (
    NiseDecomposition,
    SpragueGeers,
    nise,
    russell_magnitude,
    sprague_geers,
)
from .dtw import DtwResult, dtw_align
from .report import METRIC_NAMES, MetricConfig, MetricReport, full_report
from .scores import (
    CORRIDOR_DEFAULT,
    EEARTH_WEIGHTS,
    GRADE_LABELS,
    GRADE_THRESHOLDS,
    ISO_WEIGHTS,
    EearthScore,
    Iso18571Scores,
    combine_eearth,
    corridor_score,
    eearth,
    grade,
    iso18571_scores,
)

__all__ = [
    "CORRIDOR_DEFAULT",
    "EEARTH_WEIGHTS",
    "GRADE_LABELS",
    "GRADE_THRESHOLDS",
    "ISO_WEIGHTS",
    "METRIC_NAMES",
    "DtwResult",
    "EearthScore",
    "Iso18571Scores",
    "MetricConfig",
    "MetricReport",
    "NiseDecomposition",
    "PsiStats",
    "ShiftScan",
    "SpragueGeers",
    "abs_errors",
    "basic_errors",
    "combine_eearth",
    "corridor_score",
    "cross_correlation",
    "default_max_lag",
    "dtw_align",
    "eearth",
    "full_report",
    "grade",
    "iso18571_scores",
    "nise",
    "nrmse",
    "pearson",
    "psi_stats",
    "rmse",
    "russell_magnitude",
    "sprague_geers",
    "variance_scores",
]
