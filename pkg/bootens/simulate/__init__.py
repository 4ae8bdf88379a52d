from .dataset import (
    BUNDLED_DATASET,
    Dataset,
    dataset_digest,
    load_csv,
    make_synthetic_dataset,
    split_covariates,
    synthetic_mean,
    synthetic_sigma,
)
from .forest import ForestConfig, RandomForest, RegressionTree, fit_forest
from .ground_truth import (
    SIGMA_SQ_FLOOR,
    GroundTruth,
    build_ground_truth_nn,
    build_ground_truth_rf,
    load_ground_truth,
    save_ground_truth,
    simulate_replicate,
    simulate_targets,
)

__all__ = [
    "BUNDLED_DATASET",
    "Dataset",
    "ForestConfig",
    "GroundTruth",
    "RandomForest",
    "RegressionTree",
    "SIGMA_SQ_FLOOR",
    "build_ground_truth_nn",
    "build_ground_truth_rf",
    "dataset_digest",
    "fit_forest",
    "load_csv",
    "load_ground_truth",
    "make_synthetic_dataset",
    "save_ground_truth",
    "simulate_replicate",
    "simulate_targets",
    "split_covariates",
    "synthetic_mean",
    "synthetic_sigma",
]
