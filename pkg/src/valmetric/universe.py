"""Manufactured universe: a PT2 plant with controlled imperfections.

Generates artificial "experiments" (reference runs with process noise,
step delay and measurement noise), clean candidate simulations over a
gain/damping grid, and synthetic expert ratings for every pair. Everything
is reproducible from one seed via counter-based per-cell RNG streams.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParseError
from .pipeline import LabeledDataset, LabeledPair
from .series import SeriesPair, TimeSeries

logger = logging.getLogger(__name__)

STEP_TIME = 0.1  # input step fires at this time plus the configured delay

# stream tags keep the per-cell RNG streams disjoint
_STREAM_EXPERIMENT = 1
_STREAM_RATING = 2


@dataclass(frozen=True)
class Pt2Params:
    """Plant parameters for one simulation run."""

    k: float
    d: float
    t: float
    process_noise: float = 0.0
    t_delay: float = 0.0

    def __post_init__(self) -> None:
        if self.t <= 0.0 or self.d <= 0.0:
            raise ConfigError("PT2 requires t > 0 and d > 0")


def _grid5() -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(0.95, 1.15, 5))


@dataclass(frozen=True)
class UniverseConfig:
    """All knobs of the manufactured universe (defaults per the reference
    parameter table). ``k_grid``/``d_grid`` are relative factors applied to
    the reference gain/damping; delays are in milliseconds.
    """

    k0: float = 1.0
    d0: float = 0.5
    t0: float = 0.07
    sigma_measurement: float = 0.01
    p0_values: tuple[float, ...] = (0.0, 1.5, 3.0)
    t_delay_ms_values: tuple[float, ...] = (0.0, 0.5, 1.0)
    k_grid: tuple[float, ...] = field(default_factory=_grid5)
    d_grid: tuple[float, ...] = field(default_factory=_grid5)
    w_k: float = 0.7
    w_d: float = 0.7
    sigma_exp: float = 0.05
    n_experts: int = 10
    dt: float = 1e-3
    t_end: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.sigma_measurement, self.sigma_exp) < 0.0:
            raise ConfigError("sigma values must be >= 0")
        if not (self.k_grid and self.d_grid and self.p0_values and self.t_delay_ms_values):
            raise ConfigError("grids must be non-empty")
        if self.dt <= 0.0:
            raise ConfigError("dt must be > 0")
        if self.t_end <= STEP_TIME:
            raise ConfigError(f"t_end must exceed the step time {STEP_TIME}")
        if self.n_experts < 1:
            raise ConfigError("n_experts must be >= 1")

    @property
    def n_pairs(self) -> int:
        n_experiments = len(self.p0_values) * len(self.t_delay_ms_values)
        return n_experiments * len(self.k_grid) * len(self.d_grid)

    def to_json_dict(self) -> dict:
        return {
            "k0": self.k0,
            "d0": self.d0,
            "t0": self.t0,
            "sigma_measurement": self.sigma_measurement,
            "p0_values": list(self.p0_values),
            "t_delay_ms_values": list(self.t_delay_ms_values),
            "k_grid": list(self.k_grid),
            "d_grid": list(self.d_grid),
            "w_k": self.w_k,
            "w_d": self.w_d,
            "sigma_exp": self.sigma_exp,
            "n_experts": self.n_experts,
            "dt": self.dt,
            "t_end": self.t_end,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> UniverseConfig:
        kwargs = dict(doc)
        for key in ("p0_values", "t_delay_ms_values", "k_grid", "d_grid"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad universe config: {exc}") from None


def simulate_pt2(params: Pt2Params, dt: float, t_end: float) -> TimeSeries:
    """Fixed-step RK4 integration of the 2-state PT2 step response.

    The step instant is split out of its integration interval so the
    piecewise-constant input never lands inside an RK4 stage, keeping the
    integrator at full order across the discontinuity.
    """
    if dt > params.t / 20.0:
        raise ConfigError(f"dt {dt} too coarse for time constant {params.t}")
    n_steps = int(round(t_end / dt))
    t_grid = np.arange(n_steps + 1) * dt
    t_step = STEP_TIME + params.t_delay

    a11 = params.process_noise
    a21 = -1.0 / params.t**2
    a22 = -2.0 * params.d / params.t
    b2 = params.k / params.t**2

    def deriv(x1: float, x2: float, u: float) -> tuple[float, float]:
        return a11 * x1 + x2, a21 * x1 + a22 * x2 + b2 * u

    def rk4(x1: float, x2: float, h: float, u: float) -> tuple[float, float]:
        k1 = deriv(x1, x2, u)
        k2 = deriv(x1 + 0.5 * h * k1[0], x2 + 0.5 * h * k1[1], u)
        k3 = deriv(x1 + 0.5 * h * k2[0], x2 + 0.5 * h * k2[1], u)
        k4 = deriv(x1 + h * k3[0], x2 + h * k3[1], u)
        return (
            x1 + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x2 + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        )

    out = np.empty(n_steps + 1)
    out[0] = 0.0
    x1, x2 = 0.0, 0.0
    eps = 1e-12
    for i in range(n_steps):
        lo, hi = t_grid[i], t_grid[i + 1]
        if lo + eps < t_step < hi - eps:
            u_lo = 1.0 if lo >= t_step - eps else 0.0
            x1, x2 = rk4(x1, x2, t_step - lo, u_lo)
            x1, x2 = rk4(x1, x2, hi - t_step, 1.0)
        else:
            u = 1.0 if lo >= t_step - eps else 0.0
            x1, x2 = rk4(x1, x2, hi - lo, u)
        out[i + 1] = x1
    return TimeSeries(t=t_grid, v=out, name=f"pt2_k{params.k:g}_d{params.d:g}")


def make_experiment(
    config: UniverseConfig,
    p0: float,
    t_delay: float,
    rng: np.random.Generator,
) -> TimeSeries:
    """One synthetic measurement: reference plant with a process-noise draw
    held fixed for the run, then additive Gaussian sensor noise."""
    process_noise = float(rng.uniform(-p0, p0))
    clean = simulate_pt2(
        Pt2Params(
            k=config.k0,
            d=config.d0,
            t=config.t0,
            process_noise=process_noise,
            t_delay=t_delay,
        ),
        config.dt,
        config.t_end,
    )
    noise = rng.normal(0.0, config.sigma_measurement, clean.v.size)
    return TimeSeries(t=clean.t, v=clean.v + noise, name="experiment")


def synth_rating(
    k: float, d: float, config: UniverseConfig, rng: np.random.Generator
) -> float:
    """Expert-rating stand-in: relative parameter deviations, weighted,
    plus rater noise, clamped onto the [0, 1] scale."""
    if k <= 0.0 or d <= 0.0:
        raise ConfigError("rating requires k > 0 and d > 0")
    dev_k = abs(2.0 * (k - config.k0) / (config.k0 + k))
    dev_d = abs(2.0 * (d - config.d0) / (config.d0 + d))
    raw = 1.0 - (config.w_k * dev_k + config.w_d * dev_d)
    raw += float(rng.normal(0.0, config.sigma_exp))
    return float(np.clip(raw, 0.0, 1.0))


@dataclass(frozen=True)
class UniverseBundle:
    """Dataset plus the raw series it was assembled from."""

    dataset: LabeledDataset
    experiments: dict[str, TimeSeries]
    simulations: dict[str, TimeSeries]
    pair_sources: dict[str, tuple[str, str]]  # pair_id -> (experiment, simulation)
    config: UniverseConfig


def build_dataset(config: UniverseConfig) -> UniverseBundle:
    """Full factorial universe: every (process-noise, delay) experiment
    paired with every clean (gain, damping) simulation, each pair rated by
    ``n_experts`` synthetic experts.
    """
    simulations: dict[str, TimeSeries] = {}
    sim_params: dict[str, tuple[float, float]] = {}
    for ki, kf in enumerate(config.k_grid):
        for di, df in enumerate(config.d_grid):
            sim_id = f"sim{ki}x{di}"
            k, d = config.k0 * kf, config.d0 * df
            simulations[sim_id] = simulate_pt2(
                Pt2Params(k=k, d=d, t=config.t0), config.dt, config.t_end
            )
            sim_params[sim_id] = (k, d)

    experiments: dict[str, TimeSeries] = {}
    exp_index = 0
    records: list[LabeledPair] = []
    pair_sources: dict[str, tuple[str, str]] = {}
    for p0 in config.p0_values:
        for delay_ms in config.t_delay_ms_values:
            exp_id = f"exp{exp_index}"
            rng = np.random.default_rng((config.seed, _STREAM_EXPERIMENT, exp_index))
            experiments[exp_id] = make_experiment(
                config, p0, delay_ms * 1e-3, rng
            )
            for sim_index, sim_id in enumerate(simulations):
                pair_id = f"{exp_id}-{sim_id}"
                k, d = sim_params[sim_id]
                rating_rng = np.random.default_rng(
                    (config.seed, _STREAM_RATING, exp_index, sim_index)
                )
                ratings = tuple(
                    (f"expert{j}", synth_rating(k, d, config, rating_rng))
                    for j in range(config.n_experts)
                )
                records.append(
                    LabeledPair(
                        pair_id=pair_id,
                        pair=SeriesPair(x=simulations[sim_id], y=experiments[exp_id]),
                        ratings=ratings,
                    )
                )
                pair_sources[pair_id] = (exp_id, sim_id)
            exp_index += 1

    return UniverseBundle(
        dataset=LabeledDataset(records=tuple(records), provenance="synthetic"),
        experiments=experiments,
        simulations=simulations,
        pair_sources=pair_sources,
        config=config,
    )


def _write_series_csv(path: Path, series: TimeSeries) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "v"])
        for t, v in zip(series.t, series.v):
            writer.writerow([repr(float(t)), repr(float(v))])


def _read_series_csv(path: Path, name: str) -> TimeSeries:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "v"]:
            raise ParseError(f"{path}: expected header t,v")
        rows = [(float(a), float(b)) for a, b in reader]
    t, v = zip(*rows)
    return TimeSeries(t=np.array(t), v=np.array(v), name=name)


def save_bundle(
    bundle: UniverseBundle, out_dir: str | Path, extra_manifest: dict | None = None
) -> None:
    """Directory layout: experiments/*.csv, simulations/*.csv, ratings.csv
    and a manifest tying pair ids to their source files.

    ``extra_manifest`` entries (run provenance and the like) merge into the
    manifest so the directory keeps exactly one manifest file.
    """
    out = Path(out_dir)
    (out / "experiments").mkdir(parents=True, exist_ok=True)
    (out / "simulations").mkdir(parents=True, exist_ok=True)
    for exp_id, series in bundle.experiments.items():
        _write_series_csv(out / "experiments" / f"{exp_id}.csv", series)
    for sim_id, series in bundle.simulations.items():
        _write_series_csv(out / "simulations" / f"{sim_id}.csv", series)

    with open(out / "ratings.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair_id", "expert_id", "rating"])
        for rec in bundle.dataset.records:
            for expert_id, rating in rec.ratings:
                writer.writerow([rec.pair_id, expert_id, repr(float(rating))])

    manifest = {
        "provenance": bundle.dataset.provenance,
        "seed": bundle.config.seed,
        "config": bundle.config.to_json_dict(),
        "pairs": [
            {
                "pair_id": pid,
                "experiment": f"experiments/{exp_id}.csv",
                "simulation": f"simulations/{sim_id}.csv",
            }
            for pid, (exp_id, sim_id) in bundle.pair_sources.items()
        ],
    }
    manifest.update(extra_manifest or {})
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_bundle(in_dir: str | Path) -> UniverseBundle:
    """Inverse of save_bundle; reload is bit-exact because floats are
    written with repr."""
    root = Path(in_dir)
    try:
        with open(root / "manifest.json") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"{root}: no manifest.json") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{root}/manifest.json: {exc}") from None

    config = UniverseConfig.from_json_dict(manifest["config"])

    ratings: dict[str, list[tuple[str, float]]] = {}
    with open(root / "ratings.csv", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["pair_id", "expert_id", "rating"]:
            raise ParseError(f"{root}/ratings.csv: bad header")
        for pair_id, expert_id, rating in reader:
            ratings.setdefault(pair_id, []).append((expert_id, float(rating)))

    experiments: dict[str, TimeSeries] = {}
    simulations: dict[str, TimeSeries] = {}
    records: list[LabeledPair] = []
    pair_sources: dict[str, tuple[str, str]] = {}
    for entry in manifest["pairs"]:
        pid = entry["pair_id"]
        exp_id = Path(entry["experiment"]).stem
        sim_id = Path(entry["simulation"]).stem
        if exp_id not in experiments:
            experiments[exp_id] = _read_series_csv(root / entry["experiment"], exp_id)
        if sim_id not in simulations:
            simulations[sim_id] = _read_series_csv(root / entry["simulation"], sim_id)
        records.append(
            LabeledPair(
                pair_id=pid,
                pair=SeriesPair(x=simulations[sim_id], y=experiments[exp_id]),
                ratings=tuple(ratings.get(pid, ())),
            )
        )
        pair_sources[pid] = (exp_id, sim_id)

    return UniverseBundle(
        dataset=LabeledDataset(records=tuple(records), provenance=manifest["provenance"]),
        experiments=experiments,
        simulations=simulations,
        pair_sources=pair_sources,
        config=config,
    )
