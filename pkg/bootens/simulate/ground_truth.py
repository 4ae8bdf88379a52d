"""
Simulation oracles with a known regression function f(x) and noise variance sigma^2(x).

A ground truth is fitted once to a real dataset; replicate datasets then keep
the training covariates fixed and redraw only the targets.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np

from ..core import NoiseModel, RngStream
from ..errors import InvariantViolation
from ..network import MlpConfig, NetworkParams, Standardizer, fit_standardizer, forward_batch, train
from .dataset import Dataset, dataset_digest, split_covariates
from .forest import ForestConfig, RandomForest, fit_forest

log = logging.getLogger(__name__)

SIGMA_SQ_FLOOR = 1e-6
ARRAYS_FILE = "ground_truth.npz"
META_FILE = "ground_truth.json"


@dataclass
class ForestTruth:
    mean_forest: RandomForest
    variance_forest: RandomForest

    kind = "rf"

    def predict(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        f = self.mean_forest.predict(X)
        sigma_sq = np.maximum(self.variance_forest.predict(X), SIGMA_SQ_FLOOR)
        return f, sigma_sq

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {**self.mean_forest.to_arrays("mean"), **self.variance_forest.to_arrays("var")}

    def describe(self) -> Dict[str, Any]:
        return {"forest": asdict(self.mean_forest.config)}

    @staticmethod
    def restore(arrays, meta: Dict[str, Any]) -> "ForestTruth":
        cfg = ForestConfig(**meta["forest"])
        return ForestTruth(
            RandomForest.from_arrays(arrays, "mean", cfg),
            RandomForest.from_arrays(arrays, "var", cfg),
        )


@dataclass
class NetworkTruth:
    params: NetworkParams
    net: MlpConfig
    standardizer: Standardizer

    kind = "nn"

    def predict(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mean, variance = forward_batch(self.params, self.net, self.standardizer.apply_x(X))
        f = self.standardizer.invert_mean(mean)
        sigma_sq = np.maximum(self.standardizer.invert_variance(variance), SIGMA_SQ_FLOOR)
        return f, sigma_sq

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {f"net_{i}": a for i, a in enumerate(self.params.arrays())}

    def describe(self) -> Dict[str, Any]:
        net = asdict(self.net)
        net["hidden_sizes"] = list(self.net.hidden_sizes)
        return {"network": net, "standardizer": self.standardizer.to_dict()}

    @staticmethod
    def restore(arrays, meta: Dict[str, Any]) -> "NetworkTruth":
        net = MlpConfig(**meta["network"])
        count = 2 * (len(net.hidden_sizes) + 1)
        params = NetworkParams.from_arrays([arrays[f"net_{i}"] for i in range(count)])
        return NetworkTruth(params, net, Standardizer.from_dict(meta["standardizer"]))


@dataclass
class GroundTruth:
    model: ForestTruth | NetworkTruth
    noise: NoiseModel
    X_train: np.ndarray
    X_test: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.f_train, self.sigma_sq_train = self.model.predict(self.X_train)
        self.f_test, self.sigma_sq_test = self.model.predict(self.X_test)

    @property
    def kind(self) -> str:
        return self.model.kind

    def f(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict(X)[0]

    def sigma_sq(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict(X)[1]


def _split(data: Dataset, test_fraction: float, rng: RngStream):
    train_idx, test_idx = split_covariates(data.X, test_fraction, rng.child("split"))
    return data.X[train_idx], data.X[test_idx], {
        "n_train": int(len(train_idx)),
        "n_test": int(len(test_idx)),
        "test_fraction": test_fraction,
    }


def build_ground_truth_rf(
    data: Dataset,
    noise: NoiseModel,
    rng: RngStream,
    forest: ForestConfig = ForestConfig(),
    test_fraction: float = 0.1,
) -> GroundTruth:
    """
    Fit a forest to D as f(x) and a second forest to the squared residuals
    as sigma^2(x), floored at 1e-6.
    """
    mean_forest = fit_forest(
        (data.X, data.y), forest.n_trees, forest.min_leaf, forest.feature_frac,
        rng.child("mean"), forest.bootstrap,
    )
    residual_sq = (data.y - mean_forest.predict(data.X)) ** 2
    variance_forest = fit_forest(
        (data.X, residual_sq), forest.n_trees, forest.min_leaf, forest.feature_frac,
        rng.child("variance"), forest.bootstrap,
    )
    X_train, X_test, split = _split(data, test_fraction, rng)
    meta = {
        "dataset_hash": dataset_digest(data),
        "seed": rng.seed,
        "stream_id": rng.stream_id,
        **split,
    }
    gt = GroundTruth(ForestTruth(mean_forest, variance_forest), noise, X_train, X_test, meta)
    log.info(
        "random-forest ground truth: mean sigma^2 %.4g on %d training covariates",
        float(gt.sigma_sq_train.mean()),
        len(X_train),
    )
    return gt


def build_ground_truth_nn(
    data: Dataset,
    net_cfg: MlpConfig,
    rng: RngStream,
    noise: NoiseModel = NoiseModel(),
    test_fraction: float = 0.1,
) -> GroundTruth:
    """Train one mean-variance network on D and use its two heads as f(x) and sigma^2(x)."""
    standardizer = fit_standardizer(data.X, data.y)
    net = MlpConfig(**{**asdict(net_cfg), "input_dim": data.n_features}).resolved(len(data))
    params = train(net, standardizer.apply(data.X, data.y), rng.child("network")).params
    X_train, X_test, split = _split(data, test_fraction, rng)
    meta = {
        "dataset_hash": dataset_digest(data),
        "seed": rng.seed,
        "stream_id": rng.stream_id,
        **split,
    }
    return GroundTruth(NetworkTruth(params, net, standardizer), noise, X_train, X_test, meta)


def simulate_targets(
    f: np.ndarray, sigma_sq: np.ndarray, noise: NoiseModel, rng: RngStream
) -> np.ndarray:
    return f + noise.sample(rng, np.sqrt(sigma_sq))


def simulate_replicate(gt: GroundTruth, rng: RngStream) -> Tuple[np.ndarray, np.ndarray]:
    """New targets on the fixed training covariates: y = f(x) + C sigma(x) eps."""
    return gt.X_train, simulate_targets(gt.f_train, gt.sigma_sq_train, gt.noise, rng)


def save_ground_truth(path: Path, gt: GroundTruth):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    arrays = {
        "X_train": gt.X_train,
        "X_test": gt.X_test,
        "f_train": gt.f_train,
        "sigma_sq_train": gt.sigma_sq_train,
        "f_test": gt.f_test,
        "sigma_sq_test": gt.sigma_sq_test,
        **gt.model.to_arrays(),
    }
    with open(path / ARRAYS_FILE, "wb") as f:
        np.savez(f, **arrays)
    meta = {"kind": gt.kind, "noise": gt.noise.tag, **gt.meta, **gt.model.describe()}
    with open(path / META_FILE, "w") as f:
        json.dump(meta, f, sort_keys=True, indent=2)
        f.write("\n")


def load_ground_truth(path: Path) -> GroundTruth:
    path = Path(path)
    with open(path / META_FILE) as f:
        meta = json.load(f)
    with np.load(path / ARRAYS_FILE, allow_pickle=False) as arrays:
        match meta["kind"]:
            case "rf":
                model = ForestTruth.restore(arrays, meta)
            case "nn":
                model = NetworkTruth.restore(arrays, meta)
            case kind:
                raise InvariantViolation(f"{path}: unknown ground-truth kind `{kind}`")
        tabulated = {k: arrays[k] for k in ("f_train", "sigma_sq_train", "f_test", "sigma_sq_test")}
        gt_meta = {
            k: v
            for k, v in meta.items()
            if k not in ("kind", "noise", "forest", "network", "standardizer")
        }
        gt = GroundTruth(
            model, NoiseModel.from_tag(meta["noise"]), arrays["X_train"], arrays["X_test"], gt_meta
        )
    for name, expected in tabulated.items():
        if not np.allclose(getattr(gt, name), expected, rtol=1e-12, atol=0.0):
            raise InvariantViolation(f"{path}: restored ground truth disagrees on `{name}`")
    return gt
