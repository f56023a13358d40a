"""Deterministic synthetic series shared by the test modules."""

import numpy as np

from fm2i.bench import Dataset
from fm2i.series import Period, TimeSeries

FAMILIES = ("sine", "damped", "linear", "ar1")


def make_series(seed, family, n=48):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    if family == "sine":
        period = rng.integers(6, 13)
        return 10 + 3 * np.sin(2 * np.pi * t / period + rng.uniform(0, 6)) + rng.normal(0, 0.1, n)
    if family == "damped":
        period = rng.integers(6, 13)
        return 10 + 5 * np.exp(-t / 40) * np.sin(2 * np.pi * t / period) + rng.normal(0, 0.05, n)
    if family == "linear":
        return 5 + 0.5 * t + rng.normal(0, 0.5, n)
    x = np.zeros(n)
    for i in range(1, n):
        x[i] = 0.7 * x[i - 1] + rng.normal()
    return 20 + x


def desk_series(count=20, n=48):
    """(family, values) pairs cycling through the four families."""
    return [(FAMILIES[i % 4], make_series(i, FAMILIES[i % 4], n)) for i in range(count)]


def yearly_dataset(count=20, n=48):
    return Dataset([
        TimeSeries(values, id=f"Y{i + 1:03d}", period=Period.YEARLY, declared_horizon=6, category="other")
        for i, (_, values) in enumerate(desk_series(count, n))
    ])
