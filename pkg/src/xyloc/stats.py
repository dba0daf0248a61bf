"""Ensemble reductions: per-entry summaries, quantiles, seeded bootstrap intervals."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy import stats

N_RESAMPLES = 1000


class Interval(NamedTuple):
    estimate: float
    low: float
    high: float


def summarize(stack) -> dict:
    """Mean, median and max along axis 0 of a stacked ensemble array."""
    a = np.asarray(stack, dtype=np.float64)
    return {"mean": a.mean(axis=0), "median": np.median(a, axis=0), "max": a.max(axis=0)}


def quantiles(values, qs=(0.1, 0.25, 0.5, 0.75, 0.9)) -> dict:
    v = np.asarray(values, dtype=np.float64)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return {f"q{int(round(q * 100)):02d}": None for q in qs}
    return {f"q{int(round(q * 100)):02d}": float(np.quantile(v, q)) for q in qs}


def bootstrap_ci(values, statistic=np.median, seed: int = 0, level: float = 0.95, n_resamples: int = N_RESAMPLES) -> Interval:
    """Percentile bootstrap interval; constant data gives a zero-width interval."""
    v = np.asarray(values, dtype=np.float64)
    est = float(statistic(v))
    if v.size < 2 or np.all(v == v[0]):
        return Interval(est, est, est)
    res = stats.bootstrap(
        (v,),
        statistic,
        n_resamples=n_resamples,
        confidence_level=level,
        method="percentile",
        vectorized=False,
        rng=np.random.default_rng(seed),
    )
    return Interval(est, float(res.confidence_interval.low), float(res.confidence_interval.high))


def bootstrap_difference(a, b, statistic=np.median, seed: int = 0, level: float = 0.95, n_resamples: int = N_RESAMPLES) -> Interval:
    """Interval for ``statistic(a) - statistic(b)`` from independent samples."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    est = float(statistic(a) - statistic(b))
    if np.all(a == a[0]) and np.all(b == b[0]):
        return Interval(est, est, est)
    res = stats.bootstrap(
        (a, b),
        lambda x, y: statistic(x) - statistic(y),
        n_resamples=n_resamples,
        confidence_level=level,
        method="percentile",
        vectorized=False,
        rng=np.random.default_rng(seed),
    )
    return Interval(est, float(res.confidence_interval.low), float(res.confidence_interval.high))
