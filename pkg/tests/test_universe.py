"""Synthetic data generator checked against the analytic step response."""

import json
import math

import numpy as np
import pytest

from valmetric.errors import ConfigError, ParseError
from valmetric.universe import (
    STEP_TIME,
    Pt2Params,
    UniverseConfig,
    build_dataset,
    load_bundle,
    make_experiment,
    save_bundle,
    simulate_pt2,
    synth_rating,
)


def closed_form_step(t, k, d, t_plant, t_step):
    """Analytic underdamped step response of the second-order plant."""
    w = 1.0 / t_plant
    wd = w * math.sqrt(1.0 - d * d)
    tau = np.maximum(t - t_step, 0.0)
    resp = k * (
        1.0
        - np.exp(-d * w * tau)
        * (np.cos(wd * tau) + (d * w / wd) * np.sin(wd * tau))
    )
    return np.where(t >= t_step, resp, 0.0)


def small_config(**overrides):
    defaults = dict(
        k_grid=(1.0, 1.1),
        d_grid=(0.9, 1.0),
        p0_values=(0.0, 1.5),
        t_delay_ms_values=(0.0,),
        n_experts=2,
        t_end=0.3,
        seed=7,
    )
    defaults.update(overrides)
    return UniverseConfig(**defaults)


# -------------------------------------------------------------- integrator


@pytest.mark.parametrize("t_delay", [0.0, 0.0005])
def test_rk4_matches_analytic_solution(t_delay):
    params = Pt2Params(k=1.0, d=0.5, t=0.07, t_delay=t_delay)
    series = simulate_pt2(params, dt=1e-3, t_end=1.0)
    expected = closed_form_step(series.t, 1.0, 0.5, 0.07, STEP_TIME + t_delay)
    assert np.max(np.abs(series.v - expected)) < 1e-6


def test_output_is_zero_before_the_step():
    series = simulate_pt2(Pt2Params(k=2.0, d=0.6, t=0.05), dt=1e-3, t_end=0.5)
    before = series.v[series.t <= STEP_TIME]
    assert before.size > 0
    assert np.all(before == 0.0)


def test_settles_to_the_gain():
    series = simulate_pt2(Pt2Params(k=1.3, d=0.5, t=0.07), dt=1e-3, t_end=1.0)
    assert series.v[-1] == pytest.approx(1.3, rel=0.01)


def test_grid_shape():
    series = simulate_pt2(Pt2Params(k=1.0, d=0.5, t=0.07), dt=1e-3, t_end=0.25)
    assert series.t[0] == 0.0
    assert series.t[-1] == pytest.approx(0.25, abs=1e-12)
    assert series.v.size == 251


def test_delayed_step_starts_later():
    base = simulate_pt2(Pt2Params(k=1.0, d=0.5, t=0.07), dt=1e-3, t_end=0.3)
    late = simulate_pt2(
        Pt2Params(k=1.0, d=0.5, t=0.07, t_delay=0.0005), dt=1e-3, t_end=0.3
    )
    assert np.flatnonzero(late.v)[0] > np.flatnonzero(base.v)[0] - 1
    assert np.sum(np.abs(late.v)) < np.sum(np.abs(base.v))


def test_integrator_guards():
    with pytest.raises(ConfigError):
        simulate_pt2(Pt2Params(k=1.0, d=0.5, t=0.07), dt=0.01, t_end=1.0)
    with pytest.raises(ConfigError):
        Pt2Params(k=1.0, d=0.5, t=0.0)
    with pytest.raises(ConfigError):
        Pt2Params(k=1.0, d=-0.1, t=0.07)


# -------------------------------------------------------------- experiments


def test_measurement_noise_level():
    config = UniverseConfig(dt=1e-4, t_end=1.0, sigma_measurement=0.01)
    rng = np.random.default_rng(123)
    experiment = make_experiment(config, p0=0.0, t_delay=0.0, rng=rng)
    clean = simulate_pt2(
        Pt2Params(k=config.k0, d=config.d0, t=config.t0), config.dt, config.t_end
    )
    noise = experiment.v - clean.v
    assert np.std(noise) == pytest.approx(0.01, rel=0.05)
    assert abs(np.mean(noise)) < 0.001


def test_process_noise_changes_the_trajectory():
    config = UniverseConfig(t_end=0.5)
    clean = make_experiment(
        config, p0=0.0, t_delay=0.0, rng=np.random.default_rng(5)
    )
    perturbed = make_experiment(
        config, p0=3.0, t_delay=0.0, rng=np.random.default_rng(5)
    )
    # same sensor-noise stream, so any difference is the process term
    assert np.max(np.abs(clean.v - perturbed.v)) > 0.05


# ------------------------------------------------------------------ ratings


def quiet_config(**overrides):
    return UniverseConfig(sigma_exp=0.0, **overrides)


def test_rating_hand_oracles():
    config = quiet_config()
    rng = np.random.default_rng(0)
    assert synth_rating(1.0, 0.5, config, rng) == 1.0
    assert synth_rating(1.15, 0.5, config, rng) == pytest.approx(
        0.9023255813953489, abs=1e-15
    )
    assert synth_rating(1.05, 0.525, config, rng) == pytest.approx(
        0.9317073170731707, abs=1e-15
    )


def test_rating_decreases_with_parameter_error():
    config = quiet_config()
    rng = np.random.default_rng(0)
    ks = [1.0, 1.05, 1.1, 1.2, 1.5]
    ratings = [synth_rating(k, 0.5, config, rng) for k in ks]
    assert all(a > b for a, b in zip(ratings, ratings[1:]))


def test_rating_is_clamped():
    config = quiet_config()
    rng = np.random.default_rng(0)
    assert synth_rating(100.0, 0.0001, config, rng) == 0.0


def test_rating_validates_parameters():
    with pytest.raises(ConfigError):
        synth_rating(0.0, 0.5, UniverseConfig(), np.random.default_rng(0))


def test_rating_noise_is_applied():
    config = UniverseConfig(sigma_exp=0.05)
    draws = [
        synth_rating(1.0, 0.5, config, np.random.default_rng(i)) for i in range(200)
    ]
    assert len(set(draws)) > 100
    assert np.std(draws) > 0.01  # clamping at 1.0 halves the spread


# ----------------------------------------------------------------- dataset


def test_dataset_counts_small():
    bundle = build_dataset(small_config())
    assert len(bundle.experiments) == 2
    assert len(bundle.simulations) == 4
    assert len(bundle.dataset) == 8 == small_config().n_pairs
    assert bundle.dataset.n_ratings == 16
    assert bundle.dataset.provenance == "synthetic"


def test_default_config_counts():
    config = UniverseConfig()
    assert config.n_pairs == 225
    assert config.n_pairs * config.n_experts == 2250


def test_pair_ids_tie_experiment_to_simulation():
    bundle = build_dataset(small_config())
    for rec in bundle.dataset.records:
        exp_id, sim_id = bundle.pair_sources[rec.pair_id]
        assert rec.pair_id == f"{exp_id}-{sim_id}"
        assert np.array_equal(rec.pair.y.v, bundle.experiments[exp_id].v)
        assert np.array_equal(rec.pair.x.v, bundle.simulations[sim_id].v)


def test_build_is_bitwise_reproducible():
    a = build_dataset(small_config())
    b = build_dataset(small_config())
    for exp_id in a.experiments:
        assert np.array_equal(a.experiments[exp_id].v, b.experiments[exp_id].v)
    for rec_a, rec_b in zip(a.dataset.records, b.dataset.records):
        assert rec_a.pair_id == rec_b.pair_id
        assert rec_a.ratings == rec_b.ratings


def test_seed_changes_the_data():
    a = build_dataset(small_config(seed=1))
    b = build_dataset(small_config(seed=2))
    assert not np.array_equal(a.experiments["exp0"].v, b.experiments["exp0"].v)
    assert a.dataset.records[0].ratings != b.dataset.records[0].ratings


def test_simulations_are_noise_free_and_shared():
    a = build_dataset(small_config(seed=1))
    b = build_dataset(small_config(seed=2))
    for sim_id in a.simulations:
        assert np.array_equal(a.simulations[sim_id].v, b.simulations[sim_id].v)


def test_config_validation():
    with pytest.raises(ConfigError):
        UniverseConfig(dt=0.0)
    with pytest.raises(ConfigError):
        UniverseConfig(t_end=0.05)
    with pytest.raises(ConfigError):
        UniverseConfig(n_experts=0)
    with pytest.raises(ConfigError):
        UniverseConfig(k_grid=())
    with pytest.raises(ConfigError):
        UniverseConfig(sigma_exp=-0.1)


def test_config_json_round_trip():
    config = small_config(sigma_exp=0.123)
    doc = json.loads(json.dumps(config.to_json_dict()))
    assert UniverseConfig.from_json_dict(doc) == config
    with pytest.raises(ConfigError):
        UniverseConfig.from_json_dict({"bogus": 1})


# ------------------------------------------------------------- save / load


def test_bundle_round_trip_is_bit_exact(tmp_path):
    bundle = build_dataset(small_config())
    save_bundle(bundle, tmp_path / "data", extra_manifest={"note": "test run"})
    back = load_bundle(tmp_path / "data")

    assert back.config == bundle.config
    assert back.pair_sources == bundle.pair_sources
    for exp_id, series in bundle.experiments.items():
        assert np.array_equal(back.experiments[exp_id].t, series.t)
        assert np.array_equal(back.experiments[exp_id].v, series.v)
    for rec_a, rec_b in zip(bundle.dataset.records, back.dataset.records):
        assert rec_a.pair_id == rec_b.pair_id
        assert rec_a.ratings == rec_b.ratings

    manifest = json.loads((tmp_path / "data" / "manifest.json").read_text())
    assert manifest["note"] == "test run"
    assert manifest["seed"] == 7


def test_load_bundle_errors(tmp_path):
    with pytest.raises(ParseError):
        load_bundle(tmp_path)

    target = tmp_path / "data"
    save_bundle(build_dataset(small_config()), target)
    (target / "ratings.csv").write_text("wrong,header\n")
    with pytest.raises(ParseError):
        load_bundle(target)
