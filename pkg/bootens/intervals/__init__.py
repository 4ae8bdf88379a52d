from .bde import (
    BdeStatistics,
    bde_confidence_interval,
    bde_intervals,
    bde_prediction_interval,
)
from .de import (
    de_confidence_interval,
    de_intervals,
    de_mixture_moments,
    de_prediction_interval,
)
from .estimators import empirical_quantiles, estimate_sigma_d_sq, estimate_sigma_t_sq
from .types import IntervalKind, IntervalSet, Method, PointPrediction

__all__ = [
    "BdeStatistics",
    "IntervalKind",
    "IntervalSet",
    "Method",
    "PointPrediction",
    "bde_confidence_interval",
    "bde_intervals",
    "bde_prediction_interval",
    "de_confidence_interval",
    "de_intervals",
    "de_mixture_moments",
    "de_prediction_interval",
    "empirical_quantiles",
    "estimate_sigma_d_sq",
    "estimate_sigma_t_sq",
]
