"""Combined magnitude/phase error measures built on signal energies."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ZeroEnergy
from ..series import SeriesPair
from .base import PsiStats, ShiftScan, cross_correlation, psi_stats


@dataclass(frozen=True)
class SpragueGeers:
    """Magnitude, phase and combined error. Phase lives in [0, 1]."""

    m: float
    p: float
    c: float

    def __post_init__(self) -> None:
        assert 0.0 <= self.p <= 1.0
        assert abs(self.c - math.hypot(self.m, self.p)) < 1e-12


@dataclass(frozen=True)
class NiseDecomposition:
    """Phase, magnitude and shape components of the normalized integral
    square error; ``p + m + s`` telescopes to the combined value ``c``."""

    p: float
    m: float
    s: float
    c: float

    def __post_init__(self) -> None:
        assert abs((self.p + self.m + self.s) - self.c) < 1e-12


def _require_energy(stats: PsiStats) -> None:
    if stats.psi_xx == 0.0 or stats.psi_yy == 0.0:
        raise ZeroEnergy("signal energy is zero")


def sprague_geers(pair: SeriesPair, stats: PsiStats | None = None) -> SpragueGeers:
    """M = sqrt(psi_xx/psi_yy) - 1, P = arccos of the normalized cross term
    over pi, C = sqrt(M^2 + P^2)."""
    stats = stats or psi_stats(pair)
    _require_energy(stats)
    m = math.sqrt(stats.psi_xx / stats.psi_yy) - 1.0
    arg = stats.psi_xy / math.sqrt(stats.psi_xx * stats.psi_yy)
    # clamp absorbs 1-ULP Cauchy-Schwarz violations
    p = math.acos(min(1.0, max(-1.0, arg))) / math.pi
    return SpragueGeers(m=m, p=p, c=math.hypot(m, p))


def russell_magnitude(pair: SeriesPair, stats: PsiStats | None = None) -> float:
    """Signed log-compressed energy mismatch, scaled to match phase errors."""
    stats = stats or psi_stats(pair)
    _require_energy(stats)
    diff = stats.psi_xx - stats.psi_yy
    ratio = abs(diff) / math.sqrt(stats.psi_xx * stats.psi_yy)
    return math.copysign(math.log10(1.0 + ratio), diff) if diff != 0.0 else 0.0


def nise(
    pair: SeriesPair,
    max_lag: int,
    stats: PsiStats | None = None,
    scan: ShiftScan | None = None,
) -> NiseDecomposition:
    """Decompose the normalized integral square error into phase, magnitude
    and shape parts using the optimal cross-correlation shift."""
    stats = stats or psi_stats(pair)
    if stats.psi_xx + stats.psi_yy == 0.0:
        raise ZeroEnergy("signal energy is zero")
    _require_energy(stats)
    scan = scan or cross_correlation(pair, max_lag)

    energy = math.sqrt(stats.psi_xx * stats.psi_yy)
    total = stats.psi_xx + stats.psi_yy
    rho_star = scan.rho_max
    psi_xy_star = rho_star * energy

    p = (2.0 * psi_xy_star - 2.0 * stats.psi_xy) / total
    m = rho_star - 2.0 * psi_xy_star / total
    s = 1.0 - rho_star
    # closed form of the telescoped sum; the dataclass asserts they agree
    c = 1.0 - 2.0 * stats.psi_xy / total
    return NiseDecomposition(p=p, m=m, s=s, c=c)
