"""Feature pipeline: turn (pair, expert ratings) records into a
regression-ready matrix, prune correlated columns, and split train/test
without leaking pairs across the boundary.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AllFeaturesMissing,
    ConfigError,
    ParseError,
    RatingOutOfRange,
    TooFewRows,
)
from .metrics import METRIC_NAMES, MetricConfig, full_report
from .series import SeriesPair

logger = logging.getLogger(__name__)

DEFAULT_CORR_THRESHOLD = 0.9
DEFAULT_TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class LabeledPair:
    """One pair plus all expert ratings collected for it."""

    pair_id: str
    pair: SeriesPair
    ratings: tuple[tuple[str, float], ...]  # (expert_id, rating)

    def __post_init__(self) -> None:
        if not self.ratings:
            raise RatingOutOfRange(f"pair {self.pair_id} has no ratings")
        for expert_id, rating in self.ratings:
            if not 0.0 <= rating <= 1.0:
                raise RatingOutOfRange(
                    f"rating {rating} by {expert_id} on {self.pair_id} outside [0, 1]"
                )


@dataclass(frozen=True)
class LabeledDataset:
    """Collection of rated pairs; the unit of ingestion for model fitting."""

    records: tuple[LabeledPair, ...]
    provenance: str = "collected"

    def __post_init__(self) -> None:
        assert self.provenance in ("synthetic", "collected")
        ids = [r.pair_id for r in self.records]
        assert len(set(ids)) == len(ids), "duplicate pair_id in dataset"

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_ratings(self) -> int:
        return sum(len(r.ratings) for r in self.records)


@dataclass(frozen=True)
class FeatureMatrix:
    """One row per (pair, rating) observation.

    Columns are alphabetically ordered feature names; ``x`` holds the
    feature values, ``y`` the expert labels. No missing values anywhere.
    """

    feature_names: tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    pair_ids: tuple[str, ...]
    expert_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        assert self.x.ndim == 2 and self.x.shape[1] == len(self.feature_names)
        assert self.x.shape[0] == self.y.shape[0] == len(self.pair_ids)
        assert len(self.expert_ids) == len(self.pair_ids)
        assert list(self.feature_names) == sorted(self.feature_names)
        assert np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))
        assert np.all((self.y >= 0.0) & (self.y <= 1.0))
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.x[:, self.feature_names.index(name)]

    def select(self, names: tuple[str, ...]) -> FeatureMatrix:
        """Restrict to the given feature columns (kept in their order)."""
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(
            feature_names=tuple(names),
            x=self.x[:, idx].copy(),
            y=self.y.copy(),
            pair_ids=self.pair_ids,
            expert_ids=self.expert_ids,
        )

    def take_rows(self, idx: np.ndarray) -> FeatureMatrix:
        return FeatureMatrix(
            feature_names=self.feature_names,
            x=self.x[idx].copy(),
            y=self.y[idx].copy(),
            pair_ids=tuple(self.pair_ids[i] for i in idx),
            expert_ids=tuple(self.expert_ids[i] for i in idx),
        )

    def to_csv(self, path: str | Path) -> None:
        """Write the matrix; floats use repr so a reload is bit-identical."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pair_id", "expert_id", "rating", *self.feature_names])
            for i in range(self.n_rows):
                writer.writerow(
                    [
                        self.pair_ids[i],
                        self.expert_ids[i],
                        repr(float(self.y[i])),
                        *(repr(float(v)) for v in self.x[i]),
                    ]
                )

    @classmethod
    def from_csv(cls, path: str | Path) -> FeatureMatrix:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file") from None
            if header[:3] != ["pair_id", "expert_id", "rating"]:
                raise ParseError(f"{path}: expected pair_id,expert_id,rating,...")
            names = tuple(header[3:])
            pair_ids, expert_ids, ys, xs = [], [], [], []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise ParseError(f"{path}:{lineno}: expected {len(header)} cells")
                pair_ids.append(row[0])
                expert_ids.append(row[1])
                try:
                    ys.append(float(row[2]))
                    xs.append([float(v) for v in row[3:]])
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from None
        return cls(
            feature_names=names,
            x=np.array(xs, dtype=float).reshape(len(xs), len(names)),
            y=np.array(ys, dtype=float),
            pair_ids=tuple(pair_ids),
            expert_ids=tuple(expert_ids),
        )


def compute_features(
    dataset: LabeledDataset, config: MetricConfig | None = None
) -> FeatureMatrix:
    """Metric reports for every pair, expanded to one row per rating.

    Any metric missing on any pair drops that column globally (with a
    logged reason) so the matrix never carries holes.
    """
    if not dataset.records:
        raise TooFewRows("dataset has no records")
    reports = [full_report(rec.pair, config) for rec in dataset.records]

    dropped: dict[str, str] = {}
    for rec, rep in zip(dataset.records, reports):
        for name, reason in rep.missing.items():
            dropped.setdefault(name, f"pair {rec.pair_id}: {reason}")
    for name, reason in sorted(dropped.items()):
        logger.warning("dropping feature %s (%s)", name, reason)

    names = tuple(n for n in METRIC_NAMES if n not in dropped)
    if not names:
        raise AllFeaturesMissing("every feature column was dropped")

    pair_ids, expert_ids, ys, xs = [], [], [], []
    for rec, rep in zip(dataset.records, reports):
        row = [rep.values[n] for n in names]
        for expert_id, rating in rec.ratings:
            pair_ids.append(rec.pair_id)
            expert_ids.append(expert_id)
            ys.append(rating)
            xs.append(row)
    return FeatureMatrix(
        feature_names=names,
        x=np.array(xs, dtype=float),
        y=np.array(ys, dtype=float),
        pair_ids=tuple(pair_ids),
        expert_ids=tuple(expert_ids),
    )


def drop_correlated(
    fm: FeatureMatrix, threshold: float = DEFAULT_CORR_THRESHOLD
) -> FeatureMatrix:
    """Greedy keep-first pruning of near-duplicate columns.

    Constant columns go first; then, scanning alphabetically, any column
    whose |Pearson correlation| with an already kept column exceeds the
    threshold is dropped.
    """
    if not 0.0 < threshold <= 1.0:
        raise ConfigError("threshold must be in (0, 1]")
    constant = [n for n in fm.feature_names if np.std(fm.column(n)) == 0.0]
    for name in constant:
        logger.info("dropping constant feature %s", name)

    kept: list[str] = []
    for name in fm.feature_names:
        if name in constant:
            continue
        col = fm.column(name)
        r_max = max(
            (abs(float(np.corrcoef(col, fm.column(k))[0, 1])) for k in kept),
            default=0.0,
        )
        if r_max > threshold:
            logger.info("dropping feature %s (|r| = %.4f)", name, r_max)
        else:
            kept.append(name)
    return fm.select(tuple(kept))


def split(
    fm: FeatureMatrix,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    seed: int | None = None,
) -> tuple[FeatureMatrix, FeatureMatrix]:
    """Pair-level train/test split: all ratings of a pair stay together,
    so the test side only contains pairs the fit never saw.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train_fraction must be in (0, 1)")
    if fm.n_rows < 2:
        raise TooFewRows("need at least 2 rows to split")
    pairs = sorted(set(fm.pair_ids))
    if len(pairs) < 2:
        raise TooFewRows("need at least 2 distinct pairs to split")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    n_train = int(np.clip(round(train_fraction * len(pairs)), 1, len(pairs) - 1))
    train_pairs = {pairs[i] for i in order[:n_train]}

    ids = np.array(fm.pair_ids)
    mask = np.isin(ids, sorted(train_pairs))
    return fm.take_rows(np.flatnonzero(mask)), fm.take_rows(np.flatnonzero(~mask))
