"""
Dual-head multilayer perceptron.

The last layer has two linear outputs: the mean m(x) and a raw log-scale
s(x). The predicted variance is `exp(s(x)) + variance_floor`. Weight matrices
are stored as (fan_in, fan_out) so a batch flows as `X @ W + b`.
"""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from ..core import RngStream

LOG_2PI = math.log(2.0 * math.pi)
VARIANCE_INIT_SCALE = 1e-3


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    hidden_sizes: Tuple[int, ...] = (40, 30, 20)
    activation: str = "relu"
    variance_floor: float = 1e-3
    # None means 1 / (# training samples), resolved when training starts
    l2_coefficient: Optional[float] = None
    epochs: int = 80
    batch_size: int = 32
    learning_rate: float = 0.001
    variance_transform: str = "exp"

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ValueError("hidden_sizes must be a nonempty list of positive sizes")
        if self.activation != "relu":
            raise ValueError(f"Unsupported activation `{self.activation}`")
        if self.variance_transform != "exp":
            raise ValueError(f"Unsupported variance transform `{self.variance_transform}`")
        if not self.variance_floor > 0:
            raise ValueError("variance_floor must be positive")
        if self.l2_coefficient is not None and self.l2_coefficient < 0:
            raise ValueError("l2_coefficient must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_dim, *self.hidden_sizes, 2]

    def resolved(self, n_samples: int) -> "MlpConfig":
        if self.l2_coefficient is not None:
            return self
        return replace(self, l2_coefficient=1.0 / n_samples)

    def digest(self) -> str:
        data = asdict(self)
        data["hidden_sizes"] = list(self.hidden_sizes)
        blob = json.dumps(data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class NetworkParams:
    weights: List[np.ndarray]
    biases: List[np.ndarray] = field(default_factory=list)

    def copy(self) -> "NetworkParams":
        return NetworkParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self) -> "NetworkParams":
        return NetworkParams(
            [np.zeros_like(w) for w in self.weights], [np.zeros_like(b) for b in self.biases]
        )

    def arrays(self) -> List[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    @staticmethod
    def from_arrays(arrays: List[np.ndarray]) -> "NetworkParams":
        return NetworkParams(list(arrays[0::2]), list(arrays[1::2]))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays())

    def matches(self, cfg: MlpConfig) -> bool:
        sizes = cfg.layer_sizes
        if len(self.weights) != len(sizes) - 1:
            return False
        return all(
            w.shape == (fan_in, fan_out) and b.shape == (fan_out,)
            for w, b, fan_in, fan_out in zip(self.weights, self.biases, sizes[:-1], sizes[1:])
        )


def init_params(cfg: MlpConfig, rng: RngStream) -> NetworkParams:
    """He-uniform weights, zero biases, near-zero variance-head weights."""
    sizes = cfg.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / fan_in)
        weights.append(rng.generator.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    weights[-1][:, 1] = rng.generator.uniform(
        -VARIANCE_INIT_SCALE, VARIANCE_INIT_SCALE, size=sizes[-2]
    )
    return NetworkParams(weights, biases)


def _forward_layers(params: NetworkParams, x: np.ndarray):
    activations = [x]
    pre_activations = []
    a = x
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        z = a @ w + b
        pre_activations.append(z)
        a = np.maximum(z, 0.0)
        activations.append(a)
    out = a @ params.weights[-1] + params.biases[-1]
    return out, activations, pre_activations


def forward_batch(params: NetworkParams, cfg: MlpConfig, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != cfg.input_dim:
        raise ValueError(f"expected {cfg.input_dim} input features, got {X.shape[1]}")
    out, _, _ = _forward_layers(params, X)
    return out[:, 0], np.exp(out[:, 1]) + cfg.variance_floor


def forward(params: NetworkParams, cfg: MlpConfig, x: np.ndarray) -> Tuple[float, float]:
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if not np.all(np.isfinite(x)):
        raise ValueError("input must be finite")
    mean, variance = forward_batch(params, cfg, x)
    return float(mean[0]), float(variance[0])


def nll_loss(mean, variance, y):
    """Gaussian negative log-likelihood, elementwise."""
    variance = np.asarray(variance, dtype=np.float64)
    if np.any(variance <= 0):
        raise ValueError("variance must be positive")
    residual = np.asarray(y, dtype=np.float64) - mean
    loss = 0.5 * (LOG_2PI + np.log(variance)) + residual**2 / (2.0 * variance)
    return float(loss) if np.ndim(loss) == 0 else loss


def _l2(cfg: MlpConfig) -> float:
    if cfg.l2_coefficient is None:
        raise ValueError("l2_coefficient is unresolved; call MlpConfig.resolved(n) first")
    return cfg.l2_coefficient


def batch_loss(params: NetworkParams, cfg: MlpConfig, X: np.ndarray, Y: np.ndarray) -> float:
    mean, variance = forward_batch(params, cfg, X)
    penalty = _l2(cfg) * sum(float(np.sum(w * w)) for w in params.weights)
    return float(np.mean(nll_loss(mean, variance, Y))) + penalty


def loss_and_gradient(
    params: NetworkParams, cfg: MlpConfig, X: np.ndarray, Y: np.ndarray
) -> Tuple[float, NetworkParams]:
    """Batch loss and its exact analytic gradient (L2 on weights only)."""
    if len(Y) == 0:
        raise ValueError("batch must be nonempty")
    l2 = _l2(cfg)
    out, activations, pre_activations = _forward_layers(params, X)
    s = out[:, 1]
    scale = np.exp(s)
    variance = scale + cfg.variance_floor
    residual = Y - out[:, 0]
    n = len(Y)

    loss = float(np.mean(0.5 * (LOG_2PI + np.log(variance)) + residual**2 / (2.0 * variance)))
    loss += l2 * sum(float(np.sum(w * w)) for w in params.weights)

    delta = np.empty_like(out)
    delta[:, 0] = -residual / variance / n
    delta[:, 1] = scale * (0.5 / variance - residual**2 / (2.0 * variance**2)) / n

    grad_w = [np.empty(0)] * len(params.weights)
    grad_b = [np.empty(0)] * len(params.biases)
    for layer in range(len(params.weights) - 1, -1, -1):
        w = params.weights[layer]
        grad_w[layer] = activations[layer].T @ delta + 2.0 * l2 * w
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ w.T) * (pre_activations[layer - 1] > 0)
    return loss, NetworkParams(grad_w, grad_b)


def backward(params: NetworkParams, cfg: MlpConfig, batch: Tuple[np.ndarray, np.ndarray]) -> NetworkParams:
    X, Y = batch
    _, grad = loss_and_gradient(params, cfg, np.atleast_2d(X), np.asarray(Y, dtype=np.float64))
    return grad
