"""Dynamic time warping with a Sakoe-Chiba band.

The DP kernel is numba-compiled; a banded cost table keeps memory at
O(n * band) so warping full-length pairs stays cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..errors import ConfigError
from ..series import SeriesPair

_INF = np.inf


@dataclass(frozen=True)
class DtwResult:
    """Optimal warp path (index pairs) and its accumulated L1 cost."""

    path: np.ndarray = field(repr=False)  # (L, 2) int array of (i, j)
    cost: float

    def __post_init__(self) -> None:
        assert self.path[0, 0] == 0 and self.path[0, 1] == 0
        steps = np.diff(self.path, axis=0)
        assert np.all(steps >= 0) and np.all(steps <= 1)
        assert np.all(steps.sum(axis=1) >= 1)

    def warped(self, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Expand both sequences along the path."""
        return a[self.path[:, 0]], b[self.path[:, 1]]


@njit(cache=True)
def _dtw_band(a, b, window):  # pragma: no cover - compiled
    n = a.shape[0]
    m = b.shape[0]
    width = 2 * window + 1
    acc = np.full((n, width), _INF)
    move = np.zeros((n, width), dtype=np.int8)  # 1=(1,1) 2=(1,0) 3=(0,1)

    for i in range(n):
        j_lo = max(0, i - window)
        j_hi = min(m - 1, i + window)
        for j in range(j_lo, j_hi + 1):
            k = j - i + window
            c = abs(a[i] - b[j])
            if i == 0 and j == 0:
                acc[0, k] = c
                continue
            best = _INF
            step = 0
            if i > 0 and j > 0:
                prev = acc[i - 1, k]  # (i-1, j-1) sits at the same band offset
                if prev < best:
                    best = prev
                    step = 1
            if i > 0 and k + 1 < width:
                prev = acc[i - 1, k + 1]  # (i-1, j)
                if prev < best:
                    best = prev
                    step = 2
            if j > 0 and k - 1 >= 0:
                prev = acc[i, k - 1]  # (i, j-1)
                if prev < best:
                    best = prev
                    step = 3
            if step != 0:
                acc[i, k] = best + c
                move[i, k] = step

    return acc, move


def dtw_align(pair_or_a, b: np.ndarray | None = None, window: int = 0) -> DtwResult:
    """Minimal-cost monotone alignment of two equal-length sequences.

    Accepts either a :class:`SeriesPair` or two raw value arrays. ``window``
    is the Sakoe-Chiba half-width in samples; the diagonal is always inside
    the band, so a path exists for every window >= 0.
    """
    if isinstance(pair_or_a, SeriesPair):
        a = pair_or_a.x.v
        bb = pair_or_a.y.v
    else:
        a = np.asarray(pair_or_a, dtype=float)
        bb = np.asarray(b, dtype=float)
    if window < 0:
        raise ConfigError("window must be >= 0")
    if a.size != bb.size:
        raise ValueError("dtw_align expects equal-length sequences")

    n = a.size
    window = min(window, n - 1)
    acc, move = _dtw_band(a, bb, window)

    # backtrack from (n-1, n-1)
    i, j = n - 1, n - 1
    cost = float(acc[i, j - i + window])
    assert np.isfinite(cost)
    rev = [(i, j)]
    while i > 0 or j > 0:
        step = move[i, j - i + window]
        if step == 1:
            i, j = i - 1, j - 1
        elif step == 2:
            i = i - 1
        elif step == 3:
            j = j - 1
        else:  # only (0, 0) has no predecessor
            raise AssertionError("broken backtrack")
        rev.append((i, j))
    path = np.array(rev[::-1], dtype=np.int64)
    return DtwResult(path=path, cost=cost)
