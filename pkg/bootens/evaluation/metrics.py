from typing import Sequence

import numpy as np

from ..core import NoiseModel, noise_cdf
from ..intervals import IntervalSet


def _check_points(n_points: int, intervals: Sequence[IntervalSet]):
    if not intervals:
        raise ValueError("need at least one replicate")
    for k, interval in enumerate(intervals):
        if len(interval) != n_points:
            raise ValueError(
                f"replicate {k} has {len(interval)} intervals for {n_points} test points"
            )


def cicf(true_f, intervals: Sequence[IntervalSet]) -> np.ndarray:
    """Per-point fraction of replicates whose confidence interval contains f(x)."""
    true_f = np.asarray(true_f, dtype=np.float64)
    _check_points(len(true_f), intervals)
    return np.mean([interval.contains(true_f) for interval in intervals], axis=0)


def containment_probability(f, sigma_sq, noise: NoiseModel, interval: IntervalSet) -> np.ndarray:
    """P(y in [L, R]) for y = f + noise, evaluated through the noise CDF."""
    sigma = np.sqrt(np.asarray(sigma_sq, dtype=np.float64))
    upper = noise_cdf(noise, sigma, interval.upper - f)
    lower = noise_cdf(noise, sigma, interval.lower - f)
    return np.clip(np.asarray(upper) - np.asarray(lower), 0.0, 1.0)


def picf(gt, intervals: Sequence[IntervalSet]) -> np.ndarray:
    """
    Per-point mean probability that a fresh observation falls in the
    prediction interval, averaged over replicates.

    `gt` provides `f_test`, `sigma_sq_test` and `noise` for the test points.
    """
    f = np.asarray(gt.f_test, dtype=np.float64)
    _check_points(len(f), intervals)
    return np.mean(
        [containment_probability(f, gt.sigma_sq_test, gt.noise, interval) for interval in intervals],
        axis=0,
    )


def brier(coverages, alpha: float) -> float:
    """Mean squared deviation of per-point coverage from the nominal 1 - alpha."""
    coverages = np.asarray(coverages, dtype=np.float64)
    if np.any((coverages < 0) | (coverages > 1)):
        raise ValueError("coverages must lie in [0, 1]")
    return float(np.mean((coverages - (1.0 - alpha)) ** 2))


def rmse(predictions, targets) -> float:
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ValueError(f"shape mismatch: {predictions.shape} vs {targets.shape}")
    return float(np.sqrt(np.mean((predictions - targets) ** 2)))
