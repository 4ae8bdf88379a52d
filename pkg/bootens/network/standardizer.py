from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from ..errors import DatasetError


@dataclass(frozen=True)
class Standardizer:
    """Per-feature and target affine scaling to zero mean and unit variance."""

    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float

    @staticmethod
    def identity(input_dim: int) -> "Standardizer":
        return Standardizer(np.zeros(input_dim), np.ones(input_dim), 0.0, 1.0)

    def apply_x(self, X: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(X) - self.x_mean) / self.x_std

    def apply_y(self, Y: np.ndarray) -> np.ndarray:
        return (np.asarray(Y, dtype=np.float64) - self.y_mean) / self.y_std

    def apply(self, X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.apply_x(X), self.apply_y(Y)

    def invert_mean(self, mean):
        return np.asarray(mean) * self.y_std + self.y_mean

    def invert_variance(self, variance):
        return np.asarray(variance) * self.y_std**2

    def invert_interval(self, lower, upper):
        return self.invert_mean(lower), self.invert_mean(upper)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x_mean": [float(v) for v in self.x_mean],
            "x_std": [float(v) for v in self.x_std],
            "y_mean": float(self.y_mean),
            "y_std": float(self.y_std),
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "Standardizer":
        return Standardizer(
            np.array(data["x_mean"], dtype=np.float64),
            np.array(data["x_std"], dtype=np.float64),
            float(data["y_mean"]),
            float(data["y_std"]),
        )


def fit_standardizer(X: np.ndarray, Y: np.ndarray) -> Standardizer:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    if len(Y) < 2:
        raise DatasetError("at least two rows are needed to standardize data")
    x_std = X.std(axis=0)
    y_std = float(Y.std())
    constant = np.flatnonzero(x_std == 0)
    if len(constant):
        raise DatasetError(f"constant input feature(s) {constant.tolist()} cannot be standardized")
    if y_std == 0:
        raise DatasetError("constant target cannot be standardized")
    return Standardizer(X.mean(axis=0), x_std, float(Y.mean()), y_std)
