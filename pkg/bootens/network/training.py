import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from ..core import RngStream
from ..errors import TrainingDivergedError
from .adam import AdamState
from .mlp import MlpConfig, NetworkParams, init_params, loss_and_gradient

log = logging.getLogger(__name__)

Data = Tuple[np.ndarray, np.ndarray]


@dataclass
class Checkpoint:
    params: NetworkParams
    adam: AdamState
    epoch_index: int
    data_order_stream: RngStream

    def copy(self) -> "Checkpoint":
        return Checkpoint(
            self.params.copy(), self.adam.copy(), self.epoch_index, self.data_order_stream.clone()
        )


class TrainResult(NamedTuple):
    params: NetworkParams
    checkpoint: Optional[Checkpoint]
    losses: List[float]


def _as_data(data: Data) -> Data:
    X, Y = data
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.asarray(Y, dtype=np.float64).reshape(-1)
    if len(Y) == 0:
        raise ValueError("training data must be nonempty")
    if X.shape[0] != len(Y):
        raise ValueError(f"{X.shape[0]} input rows but {len(Y)} targets")
    return X, Y


def _run_epochs(
    cfg: MlpConfig,
    params: NetworkParams,
    adam: AdamState,
    data: Data,
    order: RngStream,
    first_epoch: int,
    checkpoint_epoch: Optional[int] = None,
) -> Tuple[List[float], Optional[Checkpoint]]:
    X, Y = data
    n = len(Y)
    losses = []
    checkpoint = None
    if checkpoint_epoch == first_epoch:
        checkpoint = Checkpoint(params.copy(), adam.copy(), first_epoch, order.clone())
    for epoch in range(first_epoch, cfg.epochs):
        permutation = order.generator.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = permutation[start : start + cfg.batch_size]
            loss, grad = loss_and_gradient(params, cfg, X[idx], Y[idx])
            if not np.isfinite(loss) or not grad.is_finite():
                raise TrainingDivergedError(epoch + 1)
            adam.update(params, grad, cfg.learning_rate)
            total += loss * len(idx)
        losses.append(total / n)
        log.debug("epoch %d/%d: mean loss %.6f", epoch + 1, cfg.epochs, losses[-1])
        if checkpoint_epoch == epoch + 1:
            checkpoint = Checkpoint(params.copy(), adam.copy(), epoch + 1, order.clone())
    if not params.is_finite():
        raise TrainingDivergedError(cfg.epochs)
    return losses, checkpoint


def train(
    cfg: MlpConfig,
    data: Data,
    rng: RngStream,
    checkpoint_epoch: Optional[int] = None,
) -> TrainResult:
    """
    Train one network with mini-batch ADAM on standardized `(X, Y)`.

    Initialisation draws from `rng.child("init")` and the per-epoch row
    shuffles from `rng.child("order")`. With `checkpoint_epoch` set, the
    parameters, optimizer moments and shuffle stream after that many epochs
    are returned as a `Checkpoint`.
    """
    X, Y = _as_data(data)
    cfg = cfg.resolved(len(Y))
    if checkpoint_epoch is not None and not 0 <= checkpoint_epoch < cfg.epochs:
        raise ValueError(f"checkpoint_epoch must lie in [0, {cfg.epochs}), got {checkpoint_epoch}")
    params = init_params(cfg, rng.child("init"))
    adam = AdamState.zeros(params)
    losses, checkpoint = _run_epochs(
        cfg, params, adam, (X, Y), rng.child("order"), 0, checkpoint_epoch
    )
    return TrainResult(params, checkpoint, losses)


def resume_train(
    cfg: MlpConfig,
    checkpoint: Checkpoint,
    data: Data,
    reuse_order: bool = True,
) -> TrainResult:
    """
    Continue training from `checkpoint` for the remaining epochs on new data.

    With `reuse_order` the row shuffles replay the checkpoint's stream, so
    resuming on unchanged targets reproduces uninterrupted training exactly.
    Otherwise a fresh stream derived from the checkpoint's is used.
    """
    X, Y = _as_data(data)
    cfg = cfg.resolved(len(Y))
    if not checkpoint.params.matches(cfg):
        raise ValueError("checkpoint parameters do not match the network configuration")
    if not 0 <= checkpoint.epoch_index <= cfg.epochs:
        raise ValueError(f"checkpoint epoch {checkpoint.epoch_index} exceeds {cfg.epochs} epochs")
    state = checkpoint.copy()
    if reuse_order:
        order = state.data_order_stream
    else:
        order = checkpoint.data_order_stream.child("fresh-order")
    losses, _ = _run_epochs(cfg, state.params, state.adam, (X, Y), order, checkpoint.epoch_index)
    return TrainResult(state.params, None, losses)
