from .models import BootstrappedEnsemble, DeepEnsemble, EnsembleConfig
from .store import load_ensemble, save_ensemble
from .training import (
    bootstrap_indices,
    bootstrap_targets,
    epoch_budget,
    member_seeds,
    predict_members,
    train_bootstrapped_ensemble,
    train_deep_ensemble,
    train_naive_bootstrap,
    train_with_retry,
)

__all__ = [
    "BootstrappedEnsemble",
    "DeepEnsemble",
    "EnsembleConfig",
    "bootstrap_indices",
    "bootstrap_targets",
    "epoch_budget",
    "load_ensemble",
    "member_seeds",
    "predict_members",
    "save_ensemble",
    "train_bootstrapped_ensemble",
    "train_deep_ensemble",
    "train_naive_bootstrap",
    "train_with_retry",
]
