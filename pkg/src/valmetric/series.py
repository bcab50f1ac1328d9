"""Loading, validation and alignment of measurement/simulation time series.

Every downstream metric expects a :class:`SeriesPair`: two signals on one
identical, strictly increasing time grid. Alignment resamples by linear
interpolation onto the reference grid restricted to the common time range.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DataError,
    EmptyOverlap,
    GridMismatch,
    NonFiniteValue,
    NonMonotoneTime,
    ParseError,
    TooShortPair,
)

# Pairs shorter than this degenerate for derivative- and warp-based metrics.
MIN_PAIR_LENGTH = 8

# Two grids count as identical when no sample differs by more than this.
GRID_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TimeSeries:
    """One signal: strictly increasing timestamps (s) and finite values."""

    t: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.ndim != 1 or v.ndim != 1:
            raise DataError("time and value arrays must be one-dimensional")
        if t.size != v.size:
            raise DataError(
                f"length mismatch: {t.size} timestamps vs {v.size} values"
            )
        if t.size < 2:
            raise DataError("a time series needs at least 2 samples")
        if not np.isfinite(t).all():
            raise NonFiniteValue(f"series {self.name!r}: non-finite timestamp")
        if not np.isfinite(v).all():
            raise NonFiniteValue(f"series {self.name!r}: non-finite value")
        if np.any(np.diff(t) <= 0):
            raise NonMonotoneTime(
                f"series {self.name!r}: timestamps must be strictly increasing"
            )
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    def __len__(self) -> int:
        return int(self.t.size)


@dataclass(frozen=True)
class SeriesPair:
    """Aligned test signal ``x`` (simulation) and reference ``y`` (measurement)."""

    x: TimeSeries
    y: TimeSeries

    def __post_init__(self) -> None:
        if len(self.x) != len(self.y):
            raise DataError(
                f"pair lengths differ: {len(self.x)} vs {len(self.y)}"
            )
        if np.max(np.abs(self.x.t - self.y.t)) >= GRID_TOLERANCE:
            raise GridMismatch("pair signals are not on an identical time grid")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def t(self) -> np.ndarray:
        return self.y.t


def make_pair(t, x_values, y_values, name_x: str = "x", name_y: str = "y") -> SeriesPair:
    """Build a pair directly from one shared grid. Convenience for tests/tools."""
    t = np.asarray(t, dtype=float)
    return SeriesPair(
        x=TimeSeries(t=t, v=np.asarray(x_values, dtype=float), name=name_x),
        y=TimeSeries(t=t, v=np.asarray(y_values, dtype=float), name=name_y),
    )


def load_series(path: str | Path, format: str | None = None) -> TimeSeries:
    """Load a series from CSV (header ``t,v``) or JSON ``{"name", "t", "v"}``.

    The format is inferred from the suffix when not given explicitly.
    """
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format not in ("csv", "json"):
        raise ParseError(f"unknown series format {format!r}")
    if not path.exists():
        raise ParseError(f"no such file: {path}")

    if format == "csv":
        return _load_csv(path)
    return _load_json(path)


def _load_csv(path: Path) -> TimeSeries:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip() for c in header[:2]] != ["t", "v"]:
                raise ParseError(f"{path}: expected CSV header 't,v'")
            t, v = [], []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    t.append(float(row[0]))
                    v.append(float(row[1]))
                except (ValueError, IndexError) as exc:
                    raise ParseError(f"{path}:{lineno}: bad row {row!r}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if any(math.isnan(val) or math.isinf(val) for val in t + v):
        raise NonFiniteValue(f"{path}: series contains NaN/Inf")
    return TimeSeries(t=np.array(t), v=np.array(v), name=path.stem)


def _load_json(path: Path) -> TimeSeries:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or "t" not in doc or "v" not in doc:
        raise ParseError(f"{path}: expected JSON object with 't' and 'v'")
    t = np.asarray(doc["t"], dtype=float)
    v = np.asarray(doc["v"], dtype=float)
    if t.size and not (np.isfinite(t).all() and np.isfinite(v).all()):
        raise NonFiniteValue(f"{path}: series contains NaN/Inf")
    return TimeSeries(t=t, v=v, name=str(doc.get("name", path.stem)))


def grids_identical(a: TimeSeries, b: TimeSeries) -> bool:
    return len(a) == len(b) and np.max(np.abs(a.t - b.t)) < GRID_TOLERANCE


def align_pair(x: TimeSeries, y: TimeSeries, policy: str = "intersect") -> SeriesPair:
    """Align two series onto the reference (``y``) grid over their overlap.

    ``policy='intersect'`` interpolates linearly; ``policy='error'`` refuses
    any resampling and raises :class:`GridMismatch` when the grids differ.
    """
    if policy not in ("intersect", "error"):
        raise DataError(f"unknown alignment policy {policy!r}")

    if grids_identical(x, y):
        if len(x) < MIN_PAIR_LENGTH:
            raise TooShortPair(
                f"aligned pair has {len(x)} samples, need >= {MIN_PAIR_LENGTH}"
            )
        return SeriesPair(x=x, y=y)

    if policy == "error":
        raise GridMismatch("time grids differ and policy='error' forbids resampling")

    lo = max(x.t[0], y.t[0])
    hi = min(x.t[-1], y.t[-1])
    if lo > hi:
        raise EmptyOverlap(
            f"series {x.name!r} and {y.name!r} share no common time range"
        )

    mask = (y.t >= lo - GRID_TOLERANCE) & (y.t <= hi + GRID_TOLERANCE)
    grid = y.t[mask]
    if grid.size < MIN_PAIR_LENGTH:
        raise TooShortPair(
            f"aligned pair has {grid.size} samples, need >= {MIN_PAIR_LENGTH}"
        )

    xv = np.interp(grid, x.t, x.v)
    yv = y.v[mask]
    return SeriesPair(
        x=TimeSeries(t=grid, v=xv, name=x.name),
        y=TimeSeries(t=grid, v=yv, name=y.name),
    )
