import numpy as np
import pytest

from valmetric.series import SeriesPair, TimeSeries, make_pair


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def smooth_signal(rng, n, components=4):
    """Band-limited random signal; keeps DTW and shift scans well behaved."""
    t = np.arange(n) / n
    v = np.zeros(n)
    for k in range(1, components + 1):
        v += rng.normal() * np.sin(2 * np.pi * k * t) + rng.normal() * np.cos(
            2 * np.pi * k * t
        )
    return v


def random_pair(rng, n=64, noise=0.1):
    t = np.arange(n) / n
    y = smooth_signal(rng, n)
    x = y + noise * rng.normal(size=n)
    return make_pair(t, x, y)


@pytest.fixture
def sine_pair():
    t = np.arange(128) / 128.0
    y = np.sin(2 * np.pi * 3 * t)
    return make_pair(t, y.copy(), y.copy())
