"""
Probability distributions used throughout bootens.

CDFs and quantiles are evaluated in 64-bit floating point with
`scipy.special`; samplers draw from an `RngStream` and accept an optional
`size` to produce whole arrays at once.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from scipy import optimize, special

from .random import RngStream

ArrayLike = Union[float, np.ndarray]
Size = Optional[Union[int, Tuple[int, ...]]]

GAMMA_NOISE_SHAPE = 0.1
GAMMA_NOISE_SCALE = math.sqrt(10.0)


def _check_finite(**values):
    for name, value in values.items():
        if not np.all(np.isfinite(value)):
            raise ValueError(f"{name} must be finite")


def _check_probability(p):
    p = np.asarray(p, dtype=np.float64)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise ValueError("probability must lie strictly between 0 and 1")
    return p


def _as_output(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def _check_df(df: int):
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")


# --- samplers ---------------------------------------------------------------


def normal_sample(rng: RngStream, mu: ArrayLike, sigma: ArrayLike, size: Size = None) -> ArrayLike:
    """Draw from N(mu, sigma^2); sigma = 0 returns mu exactly."""
    _check_finite(mu=mu, sigma=sigma)
    if np.any(np.asarray(sigma) < 0):
        raise ValueError("sigma must be >= 0")
    if size is None:
        size = np.broadcast(np.asarray(mu), np.asarray(sigma)).shape or None
    z = rng.generator.standard_normal(size)
    return _as_output(np.asarray(mu) + np.asarray(sigma) * z)


def chi_square_sample(rng: RngStream, df: int, size: Size = None) -> ArrayLike:
    _check_df(df)
    return _as_output(np.asarray(rng.generator.chisquare(df, size)))


def student_t_sample(rng: RngStream, df: int, size: Size = None) -> ArrayLike:
    """Draw N(0,1) / sqrt(chi2(df) / df)."""
    _check_df(df)
    z = rng.generator.standard_normal(size)
    chi2 = rng.generator.chisquare(df, size)
    return _as_output(np.asarray(z / np.sqrt(chi2 / df)))


def gamma_sample(rng: RngStream, shape: float, scale: float, size: Size = None) -> ArrayLike:
    """
    Draw from Gamma(shape, scale).

    For shape < 1 the draw is boosted from Gamma(shape + 1):
    X = Y * U^(1/shape) with Y ~ Gamma(shape + 1), U ~ Uniform(0, 1).
    """
    _check_finite(shape=shape, scale=scale)
    if shape <= 0 or scale <= 0:
        raise ValueError("gamma shape and scale must be positive")
    if shape < 1.0:
        y = rng.generator.standard_gamma(shape + 1.0, size)
        u = rng.generator.random(size)
        draw = y * u ** (1.0 / shape)
    else:
        draw = rng.generator.standard_gamma(shape, size)
    return _as_output(np.asarray(draw * scale))


# --- CDFs and quantiles -----------------------------------------------------


def normal_cdf(z: ArrayLike) -> ArrayLike:
    _check_finite(z=z)
    return _as_output(special.ndtr(np.asarray(z, dtype=np.float64)))


def normal_quantile(p: ArrayLike) -> ArrayLike:
    p = _check_probability(p)
    return _as_output(special.ndtri(p))


def student_t_cdf(df: int, t: ArrayLike) -> ArrayLike:
    """t CDF through the regularized incomplete beta function."""
    _check_df(df)
    _check_finite(t=t)
    t = np.asarray(t, dtype=np.float64)
    tail = 0.5 * special.betainc(0.5 * df, 0.5, df / (df + t * t))
    return _as_output(np.where(t > 0, 1.0 - tail, tail))


def student_t_quantile(df: int, p: ArrayLike) -> ArrayLike:
    """
    Quantile of Student's t with `df` degrees of freedom.

    Only upper-half probabilities are inverted; the lower half is the exact
    negation, so `student_t_quantile(df, 1 - p) == -student_t_quantile(df, p)`.
    """
    _check_df(df)
    p = _check_probability(p)
    upper = np.maximum(p, 1.0 - p)
    q = special.stdtrit(df, upper)
    q = np.where(p == 0.5, 0.0, q)
    return _as_output(np.where(p < 0.5, -q, q))


def gamma_cdf(shape: float, scale: float, x: ArrayLike) -> ArrayLike:
    if shape <= 0 or scale <= 0:
        raise ValueError("gamma shape and scale must be positive")
    x = np.asarray(x, dtype=np.float64)
    return _as_output(special.gammainc(shape, np.maximum(x, 0.0) / scale))


# --- additive noise models --------------------------------------------------


class NoiseKind(str, Enum):
    GAUSSIAN = "gaussian"
    STUDENT_T3 = "t3"
    GAMMA = "gamma"


@dataclass(frozen=True)
class NoiseModel:
    """
    Additive noise `C * sigma(x) * eps` around the true function.

    The scale constant C makes the noise variance equal sigma(x)^2 for the
    Gaussian and t(3) models; the gamma draw is shifted by its mean.
    """

    kind: NoiseKind = NoiseKind.GAUSSIAN

    @staticmethod
    def from_tag(tag: str) -> "NoiseModel":
        match tag:
            case "gaussian" | "normal":
                return NoiseModel(NoiseKind.GAUSSIAN)
            case "t3" | "student_t3":
                return NoiseModel(NoiseKind.STUDENT_T3)
            case "gamma":
                return NoiseModel(NoiseKind.GAMMA)
            case _:
                raise ValueError(f"Unknown noise model `{tag}`")

    @property
    def tag(self) -> str:
        return self.kind.value

    @property
    def scale(self) -> float:
        match self.kind:
            case NoiseKind.STUDENT_T3:
                return math.sqrt(1.0 / 3.0)
            case _:
                return 1.0

    def sample(self, rng: RngStream, sigma: np.ndarray) -> np.ndarray:
        sigma = np.asarray(sigma, dtype=np.float64)
        match self.kind:
            case NoiseKind.GAUSSIAN:
                eps = rng.generator.standard_normal(sigma.shape)
            case NoiseKind.STUDENT_T3:
                eps = np.asarray(student_t_sample(rng, 3, sigma.shape))
            case NoiseKind.GAMMA:
                draw = gamma_sample(rng, GAMMA_NOISE_SHAPE, GAMMA_NOISE_SCALE, sigma.shape)
                eps = np.asarray(draw) - GAMMA_NOISE_SHAPE * GAMMA_NOISE_SCALE
        return self.scale * sigma * eps


def noise_cdf(model: NoiseModel, ground_sigma: ArrayLike, z: ArrayLike) -> ArrayLike:
    """CDF of the additive noise term `C * ground_sigma * eps` evaluated at z."""
    if not isinstance(model, NoiseModel):
        raise ValueError(f"Unknown noise model {model!r}")
    sigma = np.asarray(ground_sigma, dtype=np.float64)
    if np.any(sigma <= 0):
        raise ValueError("ground_sigma must be positive")
    u = np.asarray(z, dtype=np.float64) / (model.scale * sigma)
    match model.kind:
        case NoiseKind.GAUSSIAN:
            return normal_cdf(u)
        case NoiseKind.STUDENT_T3:
            return student_t_cdf(3, u)
        case NoiseKind.GAMMA:
            shifted = u + GAMMA_NOISE_SHAPE * GAMMA_NOISE_SCALE
            return gamma_cdf(GAMMA_NOISE_SHAPE, GAMMA_NOISE_SCALE, shifted)
    raise ValueError(f"Unknown noise model {model!r}")


def noise_quantile(model: NoiseModel, ground_sigma: float, p: float) -> float:
    """Invert `noise_cdf` by bracketing and Brent's method."""
    _check_probability(p)
    lo, hi = -ground_sigma, ground_sigma
    while noise_cdf(model, ground_sigma, lo) > p:
        lo *= 2.0
    while noise_cdf(model, ground_sigma, hi) < p:
        hi *= 2.0
    return optimize.brentq(
        lambda z: noise_cdf(model, ground_sigma, z) - p, lo, hi, xtol=1e-14, rtol=1e-12
    )
