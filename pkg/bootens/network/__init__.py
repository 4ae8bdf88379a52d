from .adam import AdamState
from .checkpoint import load_checkpoint, load_params, save_checkpoint, save_params
from .mlp import (
    MlpConfig,
    NetworkParams,
    backward,
    batch_loss,
    forward,
    forward_batch,
    init_params,
    loss_and_gradient,
    nll_loss,
)
from .standardizer import Standardizer, fit_standardizer
from .training import Checkpoint, TrainResult, resume_train, train

__all__ = [
    "AdamState",
    "Checkpoint",
    "MlpConfig",
    "NetworkParams",
    "Standardizer",
    "TrainResult",
    "backward",
    "batch_loss",
    "fit_standardizer",
    "forward",
    "forward_batch",
    "init_params",
    "load_checkpoint",
    "load_params",
    "loss_and_gradient",
    "nll_loss",
    "resume_train",
    "save_checkpoint",
    "save_params",
    "train",
]
