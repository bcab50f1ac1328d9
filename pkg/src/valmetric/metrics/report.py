"""One-call metric report for a pair: every supported metric under its
stable public name, with degenerate cases recorded as missing-with-reason
instead of silent NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import ValmetricError
from ..series import SeriesPair
from .base import (
    abs_errors,
    cross_correlation,
    nrmse,
    pearson,
    psi_stats,
    variance_scores,
)
from .combined import nise, russell_magnitude, sprague_geers
from .scores import (
    CORRIDOR_DEFAULT,
    EEARTH_WEIGHTS,
    _aligned_errors,
    _resolve_lag_window,
    corridor_score,
    eearth,
    iso18571_scores,
)

# The stable public contract: exactly these names, always in this
# (alphabetical) order.
METRIC_NAMES = (
    "cross_corr_max",
    "eearth",
    "explained_variance",
    "frac_explained_abs",
    "iso_corridor",
    "iso_r",
    "mae",
    "maxae",
    "medae",
    "mse",
    "nise_c",
    "nise_m",
    "nise_p",
    "nise_s",
    "nrmse",
    "pearson",
    "r2",
    "russell_m",
    "sg_c",
    "sg_m",
    "sg_p",
)

_VARIANCE_KEYS = ("r2", "frac_explained_abs", "explained_variance")


@dataclass(frozen=True)
class MetricConfig:
    """Knobs shared by the shift- and warp-based metrics.

    ``max_lag``/``window`` default to 10% of the pair length when unset.
    """

    max_lag: int | None = None
    window: int | None = None
    nrmse_normalizer: str = "range"
    corridor: tuple[float, float] = CORRIDOR_DEFAULT
    eearth_weights: tuple[float, float, float] = EEARTH_WEIGHTS


@dataclass(frozen=True)
class MetricReport:
    """Computed metric values plus reasons for any that could not be.

    ``values`` and ``missing`` partition the public metric names; present
    values are always finite.
    """

    values: dict[str, float]
    missing: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        names = set(self.values) | set(self.missing)
        assert names == set(METRIC_NAMES)
        assert not set(self.values) & set(self.missing)
        assert all(math.isfinite(v) for v in self.values.values())
        object.__setattr__(
            self, "values", {k: self.values[k] for k in sorted(self.values)}
        )
        object.__setattr__(
            self, "missing", {k: self.missing[k] for k in sorted(self.missing)}
        )

    def __getitem__(self, name: str) -> float:
        if name in self.missing:
            raise KeyError(f"{name} is missing: {self.missing[name]}")
        return self.values[name]

    def get(self, name: str) -> float | None:
        if name not in METRIC_NAMES:
            raise KeyError(name)
        return self.values.get(name)

    def items(self) -> list[tuple[str, float | None]]:
        return [(k, self.values.get(k)) for k in METRIC_NAMES]

    def to_json_dict(self) -> dict[str, float | None]:
        """Flat name -> value mapping; missing metrics map to None."""
        return {k: self.values.get(k) for k in METRIC_NAMES}

    @staticmethod
    def csv_header() -> list[str]:
        return ["pair_id", *METRIC_NAMES]

    def csv_row(self, pair_id: str) -> list[str]:
        # repr of the Python float keeps the CSV bit-identical on reload
        cells = [
            "" if (v := self.values.get(k)) is None else repr(float(v))
            for k in METRIC_NAMES
        ]
        return [pair_id, *cells]


def full_report(pair: SeriesPair, config: MetricConfig | None = None) -> MetricReport:
    """Compute every metric for one pair, sharing the energy statistics,
    shift scan and warp alignment across all of them.

    Metrics that fail on degenerate input (constant reference, zero-energy
    signal) are recorded under ``missing`` with the error message.
    """
    config = config or MetricConfig()
    max_lag, window = _resolve_lag_window(pair.n, config.max_lag, config.window)

    values: dict[str, float] = {}
    missing: dict[str, str] = {}

    def attempt(compute, *names: str) -> None:
        try:
            result = compute()
        except ValmetricError as exc:
            for name in names:
                missing[name] = f"{type(exc).__name__}: {exc}"
            return
        if len(names) == 1:
            result = (result,)
        values.update(zip(names, result))

    values.update(abs_errors(pair))
    attempt(
        lambda: tuple(variance_scores(pair)[k] for k in _VARIANCE_KEYS),
        *_VARIANCE_KEYS,
    )
    attempt(lambda: pearson(pair), "pearson")
    attempt(lambda: nrmse(pair, config.nrmse_normalizer), "nrmse")

    stats = psi_stats(pair)
    scan = cross_correlation(pair, max_lag)
    values["cross_corr_max"] = scan.rho_max

    attempt(
        lambda: (lambda sg: (sg.m, sg.p, sg.c))(sprague_geers(pair, stats)),
        "sg_m",
        "sg_p",
        "sg_c",
    )
    attempt(lambda: russell_magnitude(pair, stats), "russell_m")
    attempt(
        lambda: (lambda d: (d.p, d.m, d.s, d.c))(nise(pair, max_lag, stats, scan)),
        "nise_p",
        "nise_m",
        "nise_s",
        "nise_c",
    )
    attempt(lambda: corridor_score(pair, *config.corridor), "iso_corridor")

    try:
        aligned = _aligned_errors(pair, max_lag, window, stats, scan)
    except ValmetricError as exc:
        reason = f"{type(exc).__name__}: {exc}"
        missing["eearth"] = reason
        missing["iso_r"] = reason
    else:
        # reported on the feature scale: EEARTH/10 so every score lives in [0,1]
        values["eearth"] = (
            eearth(pair, config.eearth_weights, _aligned=aligned).score / 10.0
        )
        attempt(
            lambda: iso18571_scores(pair, config.corridor, _aligned=aligned).r,
            "iso_r",
        )

    return MetricReport(values=values, missing=missing)
