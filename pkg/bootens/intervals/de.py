from typing import Dict, Iterable, Tuple

import numpy as np

from ..core import normal_quantile, student_t_quantile
from .types import IntervalKind, IntervalSet, Method


def de_mixture_moments(member_means, member_variances):
    """
    Mean and variance of the equally weighted Gaussian mixture of members:
    the population variance of the member means plus their mean variance.
    """
    means = np.asarray(member_means, dtype=np.float64)
    variances = np.asarray(member_variances, dtype=np.float64)
    if means.shape != variances.shape:
        raise ValueError(f"shape mismatch: {means.shape} vs {variances.shape}")
    if means.shape[0] < 1:
        raise ValueError("mixture needs at least one member")
    f_star = means.mean(axis=0)
    sigma_star_sq = np.mean((means - f_star) ** 2, axis=0) + variances.mean(axis=0)
    if np.ndim(f_star) == 0:
        return float(f_star), float(sigma_star_sq)
    return f_star, sigma_star_sq


def de_prediction_interval(f_star, sigma_star_sq, alpha: float):
    if np.any(np.asarray(sigma_star_sq) < 0):
        raise ValueError("sigma_star_sq must be >= 0")
    half = normal_quantile(1.0 - alpha / 2.0) * np.sqrt(sigma_star_sq)
    return f_star - half, f_star + half


def _t_spread(member_means, alpha: float):
    means = np.asarray(member_means, dtype=np.float64)
    if means.shape[0] < 2:
        raise ValueError("DE confidence intervals need at least 2 members")
    t = abs(student_t_quantile(means.shape[0] - 1, alpha / 2.0))
    return means.mean(axis=0), t * means.std(axis=0, ddof=0)


def de_confidence_interval(member_means, alpha: float):
    """f* +- |t_{alpha/2}(M-1)| times the population (divisor M) spread of member means."""
    f_star, half = _t_spread(member_means, alpha)
    if np.ndim(f_star) == 0:
        return float(f_star - half), float(f_star + half)
    return f_star - half, f_star + half


def de_intervals(
    member_means: np.ndarray,
    member_variances: np.ndarray,
    alphas: Iterable[float],
    kinds: Iterable[IntervalKind] = (IntervalKind.CONFIDENCE, IntervalKind.PREDICTION),
    method: Method = Method.DE,
) -> Dict[Tuple[IntervalKind, float], IntervalSet]:
    """DE-formula intervals over (M, n) member predictions; also used for the naive bootstrap."""
    f_star, sigma_star_sq = de_mixture_moments(
        np.atleast_2d(member_means), np.atleast_2d(member_variances)
    )
    out = {}
    for alpha in alphas:
        for kind in kinds:
            match kind:
                case IntervalKind.CONFIDENCE:
                    lower, upper = de_confidence_interval(np.atleast_2d(member_means), alpha)
                case IntervalKind.PREDICTION:
                    lower, upper = de_prediction_interval(f_star, sigma_star_sq, alpha)
            out[(kind, alpha)] = IntervalSet(lower, upper, alpha, kind, method)
    return out
