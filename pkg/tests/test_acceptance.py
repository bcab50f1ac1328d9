"""Acceptance checklist for the whole package.

Each test exercises one advertised guarantee end to end, at its stated
tolerance and runtime budget, and prints a single PASS/FAIL line so a test
run doubles as a release checklist. Oracles here are independent of the
implementation: exhaustive path search for the aligner, closed-form signal
identities for the metric suite, fresh Monte Carlo draws for the interval
coverage.
"""

import math
import time
from types import SimpleNamespace

import numpy as np
import pytest
from fastapi.testclient import TestClient

from valmetric.metrics import (
    default_max_lag,
    dtw_align,
    grade,
    nise,
    rmse,
    russell_magnitude,
    sprague_geers,
)
from valmetric.pipeline import FeatureMatrix, compute_features, drop_correlated, split
from valmetric.regress import fit_ols, predict, score
from valmetric.series import make_pair
from valmetric.service import RatingStore, create_app
from valmetric.studies import FIGURE_SWEEPS, sweep
from valmetric.universe import UniverseConfig, build_dataset

SEED = 20240817


@pytest.fixture
def announce(capsys):
    """Print one uncaptured PASS/FAIL line per criterion, then assert."""

    def _announce(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] acceptance: {name}"
        if detail:
            line += f" ({detail})"
        with capsys.disabled():
            print(line)
        assert ok, line

    return _announce


def smooth(n=256):
    t = np.arange(n) / n
    return t, np.sin(2 * np.pi * 3 * t) + 0.3 * np.cos(2 * np.pi * 5 * t)


# ------------------------------------------------------- closed-form suite


def test_closed_form_metric_suite(announce):
    start = time.perf_counter()
    tol = 1e-9
    t, y = smooth()

    checks = []
    sg = sprague_geers(make_pair(t, y.copy(), y.copy()))
    checks.append(max(abs(sg.m), abs(sg.p), abs(sg.c)) <= tol)
    sg = sprague_geers(make_pair(t, 2 * y, y))
    checks.append(abs(sg.m - 1) <= tol and abs(sg.p) <= tol and abs(sg.c - 1) <= tol)
    sg = sprague_geers(make_pair(t, -y, y))
    checks.append(abs(sg.m) <= tol and abs(sg.p - 1) <= tol and abs(sg.c - 1) <= tol)

    want = math.log10(2.5)
    checks.append(abs(russell_magnitude(make_pair(t, 2 * y, y)) - want) <= tol)
    checks.append(abs(russell_magnitude(make_pair(t, 0.5 * y, y)) + want) <= tol)

    nise_pair = make_pair(t, 2 * y, y)
    checks.append(abs(nise(nise_pair, default_max_lag(len(y))).c - 0.2) <= tol)

    elapsed = time.perf_counter() - start
    announce(
        "closed-form metric suite",
        all(checks) and elapsed < 1.0,
        f"{sum(checks)}/{len(checks)} identities, {elapsed:.3f}s",
    )


def test_nise_components_telescope(announce):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(8, 129))
        t = np.arange(n) / n
        pair = make_pair(t, rng.normal(size=n), rng.normal(size=n))
        d = nise(pair, default_max_lag(n))
        worst = max(worst, abs(d.p + d.m + d.s - d.c))
    elapsed = time.perf_counter() - start
    announce(
        "phase+magnitude+shape telescopes to the combined error",
        worst <= 1e-12 and elapsed < 5.0,
        f"worst residual {worst:.2e} over 1000 pairs, {elapsed:.2f}s",
    )


# ------------------------------------------------------------ warping path


def _monotone_paths(n):
    """All step-monotone lattice paths (0,0) -> (n-1,n-1), as flat indices."""
    paths = []

    def walk(i, j, trail):
        trail.append(i * n + j)
        if i == n - 1 and j == n - 1:
            paths.append(tuple(trail))
        else:
            if i + 1 < n and j + 1 < n:
                walk(i + 1, j + 1, trail)
            if i + 1 < n:
                walk(i + 1, j, trail)
            if j + 1 < n:
                walk(i, j + 1, trail)
        trail.pop()

    walk(0, 0, [])
    return paths


def test_dtw_matches_exhaustive_search(announce):
    n = 6
    paths = _monotone_paths(n)
    assert len(paths) == 1683  # Delannoy number D(5, 5)
    width = max(len(p) for p in paths)
    # pad with a sentinel index pointing at an appended zero cost
    idx = np.full((len(paths), width), n * n, dtype=np.intp)
    for row, p in enumerate(paths):
        idx[row, : len(p)] = p

    dtw_align(np.zeros(n), np.zeros(n), window=n - 1)  # JIT warm-up

    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    count = 4**6
    x = rng.normal(size=(count, n))
    y = rng.normal(size=(count, n))
    costs = np.abs(x[:, :, None] - y[:, None, :]).reshape(count, n * n)
    costs = np.hstack([costs, np.zeros((count, 1))])
    # accumulate in path order so the float association matches the
    # recurrence exactly, making bitwise equality a fair requirement
    totals = np.zeros((count, len(paths)))
    for k in range(width):
        totals += costs[:, idx[:, k]]
    brute = totals.min(axis=1)

    mismatches = 0
    for i in range(count):
        got = dtw_align(x[i], y[i], window=n - 1).cost
        if got != brute[i]:
            mismatches += 1
    elapsed = time.perf_counter() - start
    announce(
        "warping cost equals exhaustive path enumeration",
        mismatches == 0 and elapsed < 30.0,
        f"{count} random pairs of length {n}, {mismatches} mismatches, {elapsed:.1f}s",
    )


# --------------------------------------------- where plain RMSE goes blind


def test_equal_rmse_pairs_separate_into_phase_and_magnitude(announce):
    n = 512
    theta = 2 * np.pi * np.arange(n) / n
    delta = 0.3
    y = np.sin(theta)

    phase_pair = make_pair(theta, np.sin(theta + delta), y)
    r_phase = rmse(phase_pair)
    # amplitude factor chosen so both pairs sit at the same RMSE
    a = 1.0 + r_phase / math.sqrt(float(np.mean(y * y)))
    amp_pair = make_pair(theta, a * y, y)
    r_amp = rmse(amp_pair)

    sg_phase = sprague_geers(phase_pair)
    sg_amp = sprague_geers(amp_pair)
    ok = (
        abs(r_phase - r_amp) <= 1e-9
        and abs(sg_phase.p) > 10 * abs(sg_phase.m)
        and abs(sg_amp.m) > 10 * abs(sg_amp.p)
    )
    announce(
        "equal-RMSE sine pairs split into opposite phase/magnitude errors",
        ok,
        f"rmse {r_phase:.6f} vs {r_amp:.6f}, phase pair p/m "
        f"{sg_phase.p:.2e}/{sg_phase.m:.2e}, amplitude pair m/p "
        f"{sg_amp.m:.2e}/{sg_amp.p:.2e}",
    )


def test_grade_boundaries(announce):
    got = tuple(grade(v)[1] for v in (0.94, 0.9400001, 0.8, 0.58))
    want = ("Good", "Excellent", "Fair", "Poor")
    announce("grade boundaries", got == want, f"{got}")


# ----------------------------------------------------- regression recovery


def _planted_matrix(rng, n=500):
    f1 = rng.uniform(size=n)
    f2 = rng.uniform(size=n)
    noise = rng.normal(scale=0.01, size=n)
    # constant offset keeps the labels inside the unit interval; the
    # planted weights are unaffected
    y = 0.25 + 0.3 * f1 + 0.2 * f2 + noise
    return FeatureMatrix(
        feature_names=("f1", "f2"),
        x=np.stack([f1, f2], axis=1),
        y=y,
        pair_ids=tuple(f"p{i}" for i in range(n)),
        expert_ids=tuple("e0" for _ in range(n)),
    )


def test_ols_recovery_and_interval_coverage(announce):
    start = time.perf_counter()

    model = fit_ols(_planted_matrix(np.random.default_rng((SEED, 0))))
    recovered = []
    for j, truth in enumerate((0.3, 0.2)):
        w_raw = model.weights[j + 1] / model.feature_scales[j]
        se_raw = (
            model.sigma_train
            * math.sqrt(model.xtx_inv[j + 1, j + 1])
            / model.feature_scales[j]
        )
        recovered.append(bool(abs(w_raw - truth) <= 3 * se_raw))

    hits = 0
    trials = 0
    for r in range(200):
        rng = np.random.default_rng((SEED, 1, r))
        refit = fit_ols(_planted_matrix(rng))
        for _ in range(25):
            f1, f2 = rng.uniform(size=2)
            truth = 0.25 + 0.3 * f1 + 0.2 * f2 + rng.normal(scale=0.01)
            iv = predict(refit, {"f1": f1, "f2": f2}, alpha=0.05)
            hits += iv.lo_full <= truth <= iv.hi_full
            trials += 1
    coverage = hits / trials

    elapsed = time.perf_counter() - start
    announce(
        "planted weights recovered and 95% intervals cover",
        all(recovered) and 0.92 <= coverage <= 0.98 and elapsed < 60.0,
        f"weights within 3 SE: {recovered}, coverage {coverage:.3f} "
        f"over 200 refits, {elapsed:.1f}s",
    )


# -------------------------------------------------- manufactured universe


@pytest.fixture(scope="module")
def universe_run():
    start = time.perf_counter()
    bundle = build_dataset(UniverseConfig(seed=SEED))
    fm = compute_features(bundle.dataset)
    train, test = split(fm, seed=(SEED, 0))
    train = drop_correlated(train)
    model = fit_ols(train)
    m = score(model, test)
    return SimpleNamespace(
        model=model, test=test, m=m, elapsed=time.perf_counter() - start
    )


def test_universe_end_to_end_score(universe_run, announce):
    announce(
        "end-to-end score on the default synthetic dataset",
        universe_run.m >= 0.7 and universe_run.elapsed < 120.0,
        f"m = {universe_run.m:.4f}, {universe_run.elapsed:.1f}s",
    )


def test_full_interval_dominates_simple_on_every_test_row(universe_run, announce):
    test = universe_run.test
    violations = 0
    for i in range(test.x.shape[0]):
        row = dict(zip(test.feature_names, (float(v) for v in test.x[i])))
        iv = predict(universe_run.model, row)
        violations += iv.full_width < iv.simple_width
    announce(
        "design-aware interval at least as wide as the simple one",
        violations == 0,
        f"{test.x.shape[0]} held-out rows, {violations} violations",
    )


# ------------------------------------------------------- parameter studies


@pytest.fixture(scope="module")
def study_runs():
    start = time.perf_counter()
    results = {
        name: sweep(parameter, values, UniverseConfig(seed=SEED), repeats=50)
        for name, (parameter, values) in FIGURE_SWEEPS.items()
    }
    return results, time.perf_counter() - start


def test_study_measurement_noise_insensitivity(study_runs, announce):
    r = study_runs[0]["fig7"]
    drift = abs(r.means[-1] - r.means[0])
    announce(
        "mean score insensitive to measurement noise",
        drift <= 0.1,
        f"|mean@{r.values[-1]} - mean@{r.values[0]}| = {drift:.4f}",
    )


def test_study_small_grids_score_noisier(study_runs, announce):
    r = study_runs[0]["fig8"]
    announce(
        "score variance highest on the smallest simulation grid",
        r.variances[0] >= r.variances[-1],
        f"var@{r.values[0]:g} sims/axis {r.variances[0]:.5f} >= "
        f"var@{r.values[-1]:g} {r.variances[-1]:.5f}",
    )


def test_study_expert_count_insensitivity(study_runs, announce):
    r = study_runs[0]["fig9"]
    gap = abs(r.means[0] - r.means[-1])
    announce(
        "mean score stable from 2 to 15 experts",
        gap < 0.1,
        f"|mean@2 - mean@15| = {gap:.4f}",
    )


def test_study_rating_noise_degrades_score(study_runs, announce):
    r = study_runs[0]["fig10"]
    steps_ok = all(
        r.means[i + 1] <= r.means[i] + 0.02 for i in range(len(r.means) - 1)
    )
    announce(
        "mean score non-increasing in rater noise",
        steps_ok,
        "means " + ", ".join(f"{v:.3f}" for v in r.means),
    )


def test_study_corr_threshold_insensitivity(study_runs, announce):
    r = study_runs[0]["fig11"]
    spread = max(r.means) - min(r.means)
    announce(
        "mean score spread small across pruning thresholds",
        spread < 0.1,
        f"spread {spread:.4f} over thresholds {r.values}",
    )


def test_study_runtime_budget(study_runs, announce):
    elapsed = study_runs[1]
    announce(
        "all parameter studies at 50 repeats",
        elapsed < 900.0,
        f"{elapsed:.0f}s total",
    )


# ----------------------------------------------------------- rating service


def _pair_body(rng, pair_id, n=64):
    t = np.arange(n) / n
    y = np.sin(2 * np.pi * (1 + rng.uniform()) * t)
    return {
        "pair_id": pair_id,
        "t": t.tolist(),
        "measurement": y.tolist(),
        "simulation": (y + 0.1 * rng.normal(size=n)).tolist(),
    }


def test_service_round_trip_without_ui(tmp_path, announce):
    rng = np.random.default_rng(SEED)
    store = RatingStore(tmp_path / "store")
    client = TestClient(create_app(store))

    created = client.post(
        "/api/sessions",
        json={"pairs": [_pair_body(rng, f"ap{i}") for i in range(5)]},
    )
    assert created.status_code == 201
    sid = created.json()["session_id"]

    experts = [f"expert{e:02d}" for e in range(1, 15)]
    for i in range(5):
        for expert in experts:
            posted = client.post(
                f"/api/pairs/ap{i}/ratings",
                json={"expert_id": expert, "rating": round(rng.uniform(), 3)},
            )
            assert posted.status_code == 201

    rejected = client.post(
        "/api/pairs/ap0/ratings", json={"expert_id": "expert01", "rating": 1.2}
    )

    export = client.get(f"/api/sessions/{sid}/export")
    assert export.status_code == 200
    rows = [line for line in export.text.strip().splitlines() if line][1:]
    labels = store.export_labels(sid)

    announce(
        "service round trip",
        len(rows) == 70 and labels.n_ratings == 70 and rejected.status_code == 422,
        f"{len(rows)} exported rows, {labels.n_ratings} labeled ratings, "
        f"out-of-range -> {rejected.status_code}",
    )
