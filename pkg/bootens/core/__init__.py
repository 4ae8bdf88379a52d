from .distributions import (
    NoiseKind,
    NoiseModel,
    chi_square_sample,
    gamma_cdf,
    gamma_sample,
    noise_cdf,
    noise_quantile,
    normal_cdf,
    normal_quantile,
    normal_sample,
    student_t_cdf,
    student_t_quantile,
    student_t_sample,
)
from .random import RngStream, derive_seed, derive_stream_id

__all__ = [
    "RngStream",
    "derive_seed",
    "derive_stream_id",
    "NoiseKind",
    "NoiseModel",
    "normal_sample",
    "normal_cdf",
    "normal_quantile",
    "student_t_cdf",
    "student_t_quantile",
    "student_t_sample",
    "chi_square_sample",
    "gamma_sample",
    "gamma_cdf",
    "noise_cdf",
    "noise_quantile",
]
