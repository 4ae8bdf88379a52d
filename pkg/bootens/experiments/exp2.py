"""
Training variance against data variance as the training set grows.

For every N in the grid a random subset of N training covariates is drawn.
K networks are trained on one fixed draw of targets and K networks on K
independent draws; their across-network prediction variances separate the
variance due to training from the variance due to the targets.
"""
import logging
from typing import Any, Dict, List

import numpy as np

from ..config import ExperimentConfig
from ..core import RngStream
from ..errors import ConfigError
from ..evaluation import variance_decomposition
from ..simulate import GroundTruth, simulate_targets
from ..utils import run_tasks, write_rows
from .common import (
    NetworkTask,
    RunDirectory,
    build_ground_truth,
    fit_and_predict,
    load_dataset,
)

log = logging.getLogger(__name__)


def exp2_stream(cfg: ExperimentConfig, n: int) -> RngStream:
    return RngStream(cfg.seed).child("exp2", n)


def grid_point(cfg: ExperimentConfig, gt: GroundTruth, n: int) -> Dict[str, np.ndarray]:
    rng = exp2_stream(cfg, n)
    k = cfg.exp2.k
    subsample = rng.child("subsample").generator
    idx = np.sort(subsample.choice(len(gt.X_train), size=n, replace=False))
    X, f, sigma_sq = gt.X_train[idx], gt.f_train[idx], gt.sigma_sq_train[idx]
    y_fixed = simulate_targets(f, sigma_sq, gt.noise, rng.child("fixed-targets"))
    tasks = [
        NetworkTask(cfg.net, X, y_fixed, gt.X_test, rng.child("fixed", i), i) for i in range(k)
    ]
    for i in range(k):
        y = simulate_targets(f, sigma_sq, gt.noise, rng.child("targets", i))
        tasks.append(NetworkTask(cfg.net, X, y, gt.X_test, rng.child("random", i), k + i))
    preds = np.array(run_tasks(fit_and_predict, tasks, cfg.jobs))
    log.info("N=%d: trained %d networks", n, 2 * k)
    return {"indices": idx, "fixed": preds[:k], "random": preds[k:]}


def run_exp2(cfg: ExperimentConfig) -> List[Dict[str, Any]]:
    """One (N, sigma_t^2, sigma_d^2) row per training-set size."""
    data = load_dataset(cfg)
    gt = build_ground_truth(cfg, data)
    n_train = len(gt.X_train)
    too_large = [n for n in cfg.exp2.n_grid if n > n_train]
    if too_large:
        raise ConfigError(
            "exp2.n_grid", f"{too_large} exceed the {n_train} available training covariates"
        )
    out = cfg.output_dir
    seeds = {
        "seed": cfg.seed,
        "ground_truth_stream": gt.meta["stream_id"],
        "grid": {str(n): exp2_stream(cfg, n).stream_id for n in cfg.exp2.n_grid},
    }
    run = RunDirectory(out, cfg).open(gt.meta["dataset_hash"], seeds)

    rows = []
    for g, n in enumerate(cfg.exp2.n_grid):
        arrays = run.load_replicate(g)
        if arrays is None:
            arrays = grid_point(cfg, gt, n)
            run.save_replicate(g, arrays)
        decomposition = variance_decomposition(arrays["fixed"], arrays["random"])
        rows.append(
            {
                "n": n,
                "sigma_t_sq": decomposition.sigma_t_sq,
                "sigma_d_sq": decomposition.sigma_d_sq,
                "clamped": decomposition.clamped,
            }
        )
    header = ["n", "sigma_t_sq", "sigma_d_sq", "clamped"]
    write_rows(out / "exp2.csv", header, ([row[h] for h in header] for row in rows))
    run.write_summary(
        {
            "experiment": cfg.experiment,
            "k": cfg.exp2.k,
            "rows": rows,
            "config": cfg.echo(),
            "seeds": seeds,
        }
    )
    return rows
