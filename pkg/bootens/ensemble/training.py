"""
Deep Ensembles, Bootstrapped Deep Ensembles and the naive bootstrap.

Every member's randomness is keyed by `(base_seed, member index, phase)`, so
members can be trained in any order or in parallel with identical results.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core import RngStream, normal_sample
from ..errors import TrainingDivergedError
from ..network import (
    Checkpoint,
    MlpConfig,
    NetworkParams,
    TrainResult,
    fit_standardizer,
    forward_batch,
    resume_train,
    train,
)
from ..utils import run_tasks
from .models import BootstrappedEnsemble, DeepEnsemble, EnsembleConfig

log = logging.getLogger(__name__)

Data = Tuple[np.ndarray, np.ndarray]


def train_with_retry(
    net: MlpConfig,
    data: Data,
    rng: RngStream,
    member: int,
    checkpoint_epoch: Optional[int] = None,
) -> TrainResult:
    try:
        return train(net, data, rng, checkpoint_epoch)
    except TrainingDivergedError as e:
        log.warning("member %d diverged in epoch %d, retrying with a new seed", member, e.epoch)
    try:
        return train(net, data, rng.child("retry", 1), checkpoint_epoch)
    except TrainingDivergedError as e:
        raise TrainingDivergedError(e.epoch, where=f"ensemble member {member}") from e


def bootstrap_targets(net: MlpConfig, params: NetworkParams, X: np.ndarray, rng: RngStream) -> np.ndarray:
    """Draw Y_new ~ N(f_i(X), sigma_i^2(X)) from one member's predictive distribution."""
    mean, variance = forward_batch(params, net, X)
    return np.asarray(normal_sample(rng, mean, np.sqrt(variance)))


def _retrain_with_retry(
    net: MlpConfig,
    original: NetworkParams,
    checkpoint: Checkpoint,
    X: np.ndarray,
    rng: RngStream,
    reuse_order: bool,
    member: int,
) -> NetworkParams:
    try:
        Y_new = bootstrap_targets(net, original, X, rng)
        return resume_train(net, checkpoint, (X, Y_new), reuse_order).params
    except TrainingDivergedError as e:
        log.warning("retraining of member %d diverged in epoch %d, retrying", member, e.epoch)
    try:
        Y_new = bootstrap_targets(net, original, X, rng.child("retry", 1))
        return resume_train(net, checkpoint, (X, Y_new), reuse_order).params
    except TrainingDivergedError as e:
        raise TrainingDivergedError(e.epoch, where=f"retraining of member {member}") from e


@dataclass(frozen=True)
class MemberTask:
    cfg: EnsembleConfig
    member: int
    X: np.ndarray
    Y: np.ndarray
    phase: str


@dataclass
class MemberResult:
    params: NetworkParams
    checkpoint: Optional[Checkpoint] = None
    retrained: Optional[NetworkParams] = None


def _fit_member(task: MemberTask) -> MemberResult:
    cfg, i, X, Y = task.cfg, task.member, task.X, task.Y
    net = cfg.net.resolved(len(Y))
    match task.phase:
        case "DE":
            return MemberResult(train_with_retry(net, (X, Y), cfg.member_stream(i), i).params)
        case "NB":
            idx = bootstrap_indices(cfg.member_stream(i, "nb"), len(Y))
            result = train_with_retry(net, (X[idx], Y[idx]), cfg.member_stream(i), i)
            return MemberResult(result.params)
        case "BDE":
            if cfg.retrain_epochs == 0:
                result = train_with_retry(net, (X, Y), cfg.member_stream(i), i)
                return MemberResult(result.params, None, result.params.copy())
            result = train_with_retry(
                net, (X, Y), cfg.member_stream(i), i, cfg.checkpoint_epoch
            )
            retrained = _retrain_with_retry(
                net,
                result.params,
                result.checkpoint,
                X,
                cfg.member_stream(i, "boot"),
                cfg.reuse_order,
                i,
            )
            return MemberResult(result.params, result.checkpoint, retrained)
    raise ValueError(f"Unknown ensemble phase `{task.phase}`")


def _fit_members(cfg: EnsembleConfig, data: Data, phase: str, jobs: int):
    X, Y = data
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    if len(Y) == 0:
        raise ValueError("training data must be nonempty")
    cfg = cfg.with_input_dim(X.shape[1])
    standardizer = fit_standardizer(X, Y)
    Xs, Ys = standardizer.apply(X, Y)
    tasks = [MemberTask(cfg, i, Xs, Ys, phase) for i in range(cfg.m)]
    log.info("training %d %s members on %d rows", cfg.m, phase, len(Y))
    results = run_tasks(_fit_member, tasks, jobs)
    return cfg.net.resolved(len(Y)), standardizer, results


def train_deep_ensemble(cfg: EnsembleConfig, data: Data, jobs: int = 1) -> DeepEnsemble:
    net, standardizer, results = _fit_members(cfg, data, "DE", jobs)
    return DeepEnsemble([r.params for r in results], standardizer, net, "DE")


def train_bootstrapped_ensemble(
    cfg: EnsembleConfig, data: Data, jobs: int = 1
) -> BootstrappedEnsemble:
    """
    Train M members, checkpointing each after round(epochs * (1 - r)) epochs,
    then retrain each from its checkpoint on targets simulated from its own
    predictive distribution.

    The originals are exactly the members `train_deep_ensemble` produces for
    the same configuration and data.
    """
    if cfg.retrain_epochs == 0:
        log.warning("no epochs to retrain: retrained members equal the originals")
    elif cfg.checkpoint_epoch == 0:
        log.warning("checkpoint at epoch 0: every member is fully retrained")
    net, standardizer, results = _fit_members(cfg, data, "BDE", jobs)
    return BootstrappedEnsemble(
        [r.params for r in results],
        [r.retrained for r in results],
        standardizer,
        net,
        cfg.retrain_fraction,
        [r.checkpoint for r in results],
    )


def bootstrap_indices(rng: RngStream, n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("the naive bootstrap needs at least 2 rows")
    return rng.generator.integers(0, n, size=n)


def train_naive_bootstrap(cfg: EnsembleConfig, data: Data, jobs: int = 1) -> DeepEnsemble:
    net, standardizer, results = _fit_members(cfg, data, "NB", jobs)
    return DeepEnsemble([r.params for r in results], standardizer, net, "NB")


def predict_members(ensemble: DeepEnsemble, X_test: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-member (means, variances) on the original target scale, each (M, n)."""
    X_test = np.atleast_2d(np.asarray(X_test, dtype=np.float64))
    if X_test.shape[1] != ensemble.net.input_dim:
        raise ValueError(
            f"expected {ensemble.net.input_dim} input features, got {X_test.shape[1]}"
        )
    Xs = ensemble.standardizer.apply_x(X_test)
    means, variances = [], []
    for params in ensemble.members:
        mean, variance = forward_batch(params, ensemble.net, Xs)
        means.append(ensemble.standardizer.invert_mean(mean))
        variances.append(ensemble.standardizer.invert_variance(variance))
    return np.array(means), np.array(variances)


def epoch_budget(cfg: EnsembleConfig) -> int:
    """Epoch-equivalents of training one bootstrapped ensemble: M * (epochs + retrained epochs)."""
    return cfg.m * (cfg.net.epochs + cfg.retrain_epochs)


def member_seeds(cfg: EnsembleConfig, methods: List[str]) -> dict:
    """Derived stream ids for every member and phase, for manifests."""
    seeds = {}
    for i in range(cfg.m):
        entry = {"train": cfg.member_stream(i).stream_id}
        if "BDE" in methods:
            entry["boot"] = cfg.member_stream(i, "boot").stream_id
        if "NB" in methods:
            entry["nb"] = cfg.member_stream(i, "nb").stream_id
        seeds[f"member_{i:02d}"] = entry
    return seeds
