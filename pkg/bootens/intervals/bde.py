"""
Bootstrapped Deep Ensemble intervals.

The confidence interval is f* +- |t_{alpha/2}(M-1)| * sqrt(sigma_d^2 + sigma_t^2 / M).
The prediction interval is built by Monte Carlo: draw t ~ t(M-1), shift the
ensemble mean by t times the epistemic standard error, add N(0, aleatoric)
noise and read off the empirical alpha/2 and 1 - alpha/2 quantiles.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple

import numpy as np

from ..core import RngStream, student_t_quantile, student_t_sample
from .estimators import empirical_quantiles, estimate_sigma_d_sq, estimate_sigma_t_sq
from .types import IntervalKind, IntervalSet, Method, PointPrediction

MIN_MC_DRAWS = 1000
POINT_CHUNK = 256


def _t_critical(m: int, alpha: float) -> float:
    if m < 2:
        raise ValueError("BDE intervals need at least 2 members")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return abs(student_t_quantile(m - 1, alpha / 2.0))


@dataclass
class BdeStatistics:
    """Per-test-point BDE quantities on the original target scale."""

    f_star: np.ndarray
    sigma_t_sq: np.ndarray
    sigma_d_sq: np.ndarray
    sigma_alea_sq: np.ndarray
    m: int

    @staticmethod
    def from_predictions(original_means, original_variances, retrained_means) -> "BdeStatistics":
        original_means = np.atleast_2d(np.asarray(original_means, dtype=np.float64))
        return BdeStatistics(
            original_means.mean(axis=0),
            np.atleast_1d(estimate_sigma_t_sq(original_means)),
            np.atleast_1d(estimate_sigma_d_sq(original_means, retrained_means)),
            np.atleast_2d(original_variances).mean(axis=0),
            original_means.shape[0],
        )

    def __len__(self) -> int:
        return len(self.f_star)

    @property
    def epistemic_sq(self) -> np.ndarray:
        return self.sigma_d_sq + self.sigma_t_sq / self.m

    def point(self, j: int) -> PointPrediction:
        return PointPrediction(
            float(self.f_star[j]),
            float(self.sigma_t_sq[j]),
            float(self.sigma_d_sq[j]),
            float(self.sigma_alea_sq[j]),
            self.m,
        )


def bde_confidence_interval(p: PointPrediction, alpha: float) -> Tuple[float, float]:
    half = _t_critical(p.m, alpha) * np.sqrt(p.epistemic_sq)
    return p.f_star - half, p.f_star + half


def _mc_quantiles(
    f_star: np.ndarray,
    epistemic_sd: np.ndarray,
    aleatoric_sd: np.ndarray,
    t_draws: np.ndarray,
    z_draws: np.ndarray,
    probs: np.ndarray,
) -> np.ndarray:
    out = np.empty((len(probs), len(f_star)))
    for start in range(0, len(f_star), POINT_CHUNK):
        cols = slice(start, start + POINT_CHUNK)
        y = (
            f_star[cols]
            + t_draws[:, None] * epistemic_sd[cols]
            + z_draws[:, None] * aleatoric_sd[cols]
        )
        out[:, cols] = empirical_quantiles(y, probs, axis=0)
    return out


def _draws(m: int, n_t: int, rng: RngStream) -> Tuple[np.ndarray, np.ndarray]:
    if n_t < MIN_MC_DRAWS:
        raise ValueError(f"n_t must be >= {MIN_MC_DRAWS}, got {n_t}")
    t_draws = np.asarray(student_t_sample(rng, m - 1, n_t))
    z_draws = rng.generator.standard_normal(n_t)
    return t_draws, z_draws


def bde_prediction_interval(
    p: PointPrediction, alpha: float, n_t: int, rng: RngStream
) -> Tuple[float, float]:
    _t_critical(p.m, alpha)
    t_draws, z_draws = _draws(p.m, n_t, rng)
    lower, upper = _mc_quantiles(
        np.array([p.f_star]),
        np.array([np.sqrt(p.epistemic_sq)]),
        np.array([np.sqrt(p.sigma_alea_sq)]),
        t_draws,
        z_draws,
        np.array([alpha / 2.0, 1.0 - alpha / 2.0]),
    )[:, 0]
    return float(lower), float(upper)


def bde_intervals(
    stats: BdeStatistics,
    alphas: Iterable[float],
    n_t: int,
    rng: RngStream,
    kinds: Iterable[IntervalKind] = (IntervalKind.CONFIDENCE, IntervalKind.PREDICTION),
) -> Dict[Tuple[IntervalKind, float], IntervalSet]:
    """
    Confidence and prediction intervals for every test point and alpha.

    One set of Monte-Carlo draws is shared by all points and all alphas, so
    intervals at smaller alpha always contain those at larger alpha.
    """
    alphas = list(alphas)
    kinds = list(kinds)
    epistemic_sd = np.sqrt(stats.epistemic_sq)
    out = {}
    if IntervalKind.CONFIDENCE in kinds:
        for alpha in alphas:
            half = _t_critical(stats.m, alpha) * epistemic_sd
            out[(IntervalKind.CONFIDENCE, alpha)] = IntervalSet(
                stats.f_star - half, stats.f_star + half, alpha, IntervalKind.CONFIDENCE, Method.BDE
            )
    if IntervalKind.PREDICTION in kinds:
        for alpha in alphas:
            _t_critical(stats.m, alpha)
        t_draws, z_draws = _draws(stats.m, n_t, rng)
        probs = np.array([q for a in alphas for q in (a / 2.0, 1.0 - a / 2.0)])
        quantiles = _mc_quantiles(
            stats.f_star, epistemic_sd, np.sqrt(stats.sigma_alea_sq), t_draws, z_draws, probs
        )
        for k, alpha in enumerate(alphas):
            out[(IntervalKind.PREDICTION, alpha)] = IntervalSet(
                quantiles[2 * k], quantiles[2 * k + 1], alpha, IntervalKind.PREDICTION, Method.BDE
            )
    return out
