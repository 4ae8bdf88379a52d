from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import InvariantViolation


class IntervalKind(str, Enum):
    CONFIDENCE = "confidence"
    PREDICTION = "prediction"

    @property
    def short(self) -> str:
        return "CI" if self is IntervalKind.CONFIDENCE else "PI"


class Method(str, Enum):
    BDE = "BDE"
    DE = "DE"
    NB = "NB"


@dataclass(frozen=True)
class PointPrediction:
    f_star: float
    sigma_t_sq: float
    sigma_d_sq: float
    sigma_alea_sq: float
    m: int

    def __post_init__(self):
        if self.sigma_t_sq < 0 or self.sigma_d_sq < 0:
            raise ValueError("variance estimates must be >= 0")
        if not self.sigma_alea_sq > 0:
            raise ValueError("aleatoric variance must be positive")
        if self.m < 1:
            raise ValueError("m must be >= 1")

    @property
    def epistemic_sq(self) -> float:
        return self.sigma_d_sq + self.sigma_t_sq / self.m


@dataclass
class IntervalSet:
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    kind: IntervalKind
    method: Method

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        if self.lower.shape != self.upper.shape:
            raise ValueError("lower and upper bounds differ in shape")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise InvariantViolation(
                f"{self.method.value} {self.kind.short} at alpha={self.alpha}: "
                f"lower bound above upper bound at point {bad}"
            )

    def __len__(self) -> int:
        return len(self.lower)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, values: np.ndarray) -> np.ndarray:
        """Closed-interval containment."""
        values = np.asarray(values, dtype=np.float64)
        return (self.lower <= values) & (values <= self.upper)
