"""
Bagged CART regression forests.

Trees are stored as flat node arrays (`feature == -1` marks a leaf), so
prediction walks all query rows down a tree at once.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from ..core import RngStream
from ..errors import DatasetError

log = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    min_leaf: int = 5
    feature_frac: float = 1.0 / 3.0
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 0.0 < self.feature_frac <= 1.0:
            raise ValueError("feature_frac must lie in (0, 1]")

    def features_per_split(self, d: int) -> int:
        return max(1, min(d, round(self.feature_frac * d)))


@dataclass
class RegressionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feature = self.feature[node]
            inner = feature != LEAF
            if not np.any(inner):
                return self.value[node]
            r, n, f = rows[inner], node[inner], feature[inner]
            go_left = X[r, f] <= self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])


def _best_split(
    X: np.ndarray, y: np.ndarray, features: np.ndarray, n_try: int, min_leaf: int
) -> Tuple[int, float, float]:
    """Variance-minimising split over at least `n_try` of `features` (in order)."""
    n = len(y)
    parent = y.sum() ** 2 / n
    best = (LEAF, 0.0, parent)
    for tried, f in enumerate(features):
        if tried >= n_try and best[0] != LEAF:
            break
        order = np.argsort(X[:, f], kind="stable")
        xs, ys = X[order, f], y[order]
        left_sum = np.cumsum(ys)[:-1]
        n_left = np.arange(1, n)
        right_sum = ys.sum() - left_sum
        # score = S_L^2/n_L + S_R^2/n_R; maximising it minimises the total SSE
        score = left_sum**2 / n_left + right_sum**2 / (n - n_left)
        valid = (n_left >= min_leaf) & (n - n_left >= min_leaf) & (xs[:-1] < xs[1:])
        if not np.any(valid):
            continue
        k = int(np.argmax(np.where(valid, score, -np.inf)))
        if score[k] > best[2] + 1e-12 * max(1.0, abs(best[2])):
            best = (int(f), 0.5 * (xs[k] + xs[k + 1]), float(score[k]))
    return best


def fit_tree(X: np.ndarray, y: np.ndarray, cfg: ForestConfig, rng: RngStream) -> RegressionTree:
    n, d = X.shape
    n_try = cfg.features_per_split(d)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    stack = [(new_node(np.arange(n)), np.arange(n))]
    while stack:
        node, idx = stack.pop()
        if len(idx) < 2 * cfg.min_leaf:
            continue
        features = rng.generator.permutation(d)
        f, t, _ = _best_split(X[idx], y[idx], features, n_try, cfg.min_leaf)
        if f == LEAF:
            continue
        mask = X[idx, f] <= t
        left_idx, right_idx = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, t
        left[node] = new_node(left_idx)
        right[node] = new_node(right_idx)
        stack.append((right[node], right_idx))
        stack.append((left[node], left_idx))

    return RegressionTree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row permutation sorting by the first feature, then the next, with the target last."""
    return np.lexsort(np.column_stack([X, y]).T[::-1])


@dataclass
class RandomForest:
    trees: List[RegressionTree]
    config: ForestConfig

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.mean([tree.predict(X) for tree in self.trees], axis=0)

    def to_arrays(self, prefix: str) -> Dict[str, np.ndarray]:
        out = {f"{prefix}_sizes": np.array([t.n_nodes for t in self.trees], dtype=np.int64)}
        for name in ("feature", "threshold", "left", "right", "value"):
            out[f"{prefix}_{name}"] = np.concatenate([getattr(t, name) for t in self.trees])
        return out

    @staticmethod
    def from_arrays(arrays, prefix: str, config: ForestConfig) -> "RandomForest":
        bounds = np.concatenate([[0], np.cumsum(arrays[f"{prefix}_sizes"])])
        columns = {
            name: arrays[f"{prefix}_{name}"]
            for name in ("feature", "threshold", "left", "right", "value")
        }
        trees = [
            RegressionTree(**{name: col[lo:hi] for name, col in columns.items()})
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]
        return RandomForest(trees, config)


def fit_forest(
    data: Tuple[np.ndarray, np.ndarray],
    n_trees: int = 100,
    min_leaf: int = 5,
    feature_frac: float = 1.0 / 3.0,
    rng: RngStream | None = None,
    bootstrap: bool = True,
) -> RandomForest:
    """
    Fit `n_trees` CART trees, each on a bootstrap resample of the rows.

    Rows are put in a canonical order first, so the fitted forest does not
    depend on the order of the input rows. Tree k draws from `rng.child("tree", k)`.
    """
    cfg = ForestConfig(n_trees, min_leaf, feature_frac, bootstrap)
    rng = rng if rng is not None else RngStream(0)
    X, y = data
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = len(y)
    if n < 2:
        raise DatasetError("a forest needs at least 2 rows")
    if X.shape[0] != n:
        raise DatasetError(f"{X.shape[0]} input rows but {n} targets")
    if min_leaf > n:
        raise ValueError(f"min_leaf={min_leaf} exceeds the {n} available rows")
    order = canonical_order(X, y)
    X, y = X[order], y[order]
    trees = []
    for k in range(n_trees):
        tree_rng = rng.child("tree", k)
        if bootstrap:
            idx = np.sort(tree_rng.generator.integers(0, n, size=n))
        else:
            idx = np.arange(n)
        trees.append(fit_tree(X[idx], y[idx], cfg, tree_rng))
    log.debug(
        "fitted %d trees, %.1f leaves on average",
        n_trees,
        np.mean([t.n_leaves for t in trees]),
    )
    return RandomForest(trees, cfg)
