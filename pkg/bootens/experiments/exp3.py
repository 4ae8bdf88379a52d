"""
Check of the BDE variance estimates against an oracle.

One replicate: a BDE of `exp3.m` members is trained on simulated targets.
The oracle retrains as many networks, each on its own fresh draw of targets,
and decomposes their spread against the BDE originals.
"""
import logging
from dataclasses import replace
from typing import Any, Dict

import numpy as np

from ..config import ExperimentConfig
from ..core import RngStream, derive_seed
from ..ensemble import member_seeds, predict_members, train_bootstrapped_ensemble
from ..evaluation import (
    VarianceDecomposition,
    decomposition_check,
    variance_decomposition,
)
from ..intervals import BdeStatistics
from ..simulate import simulate_replicate, simulate_targets
from ..utils import run_tasks, write_rows
from .common import (
    NetworkTask,
    RunDirectory,
    build_ground_truth,
    fit_and_predict,
    load_dataset,
)

log = logging.getLogger(__name__)

COLUMNS = [
    "dataset",
    "bde_sigma_t_sq",
    "bde_sigma_d_sq",
    "oracle_sigma_t_sq",
    "oracle_sigma_d_sq",
    "ratio",
    "degenerate",
]


def run_exp3(cfg: ExperimentConfig) -> Dict[str, Any]:
    data = load_dataset(cfg)
    gt = build_ground_truth(cfg, data)
    rng = RngStream(cfg.seed).child("exp3")
    ens_cfg = replace(cfg.ensemble, m=cfg.exp3.m, base_seed=derive_seed(cfg.seed, "exp3"))
    out = cfg.output_dir
    seeds = {
        "seed": cfg.seed,
        "ground_truth_stream": gt.meta["stream_id"],
        "stream": rng.stream_id,
        "ensemble_seed": ens_cfg.base_seed,
        "members": member_seeds(ens_cfg, ["BDE"]),
    }
    run = RunDirectory(out, cfg).open(gt.meta["dataset_hash"], seeds)

    arrays = run.load_replicate(0)
    if arrays is None:
        X, y = simulate_replicate(gt, rng.child("targets"))
        bde = train_bootstrapped_ensemble(ens_cfg, (X, y), cfg.jobs)
        means, variances = predict_members(bde.original_ensemble(), gt.X_test)
        retrained, _ = predict_members(bde.retrained_ensemble(), gt.X_test)
        tasks = []
        for i in range(ens_cfg.m):
            y_i = simulate_targets(
                gt.f_train, gt.sigma_sq_train, gt.noise, rng.child("oracle", i)
            )
            init = rng.child("oracle-init", i)
            tasks.append(NetworkTask(cfg.net, X, y_i, gt.X_test, init, i))
        random = np.array(run_tasks(fit_and_predict, tasks, cfg.jobs))
        arrays = {
            "means": means,
            "variances": variances,
            "retrained": retrained,
            "random": random,
        }
        run.save_replicate(0, arrays)

    stats = BdeStatistics.from_predictions(
        arrays["means"], arrays["variances"], arrays["retrained"]
    )
    bde = VarianceDecomposition(float(stats.sigma_t_sq.mean()), float(stats.sigma_d_sq.mean()))
    oracle = variance_decomposition(arrays["means"], arrays["random"])
    check = decomposition_check(bde, oracle)
    degenerate = ens_cfg.retrain_epochs == 0
    if degenerate:
        log.warning("no retrained epochs: the BDE sigma_d^2 estimate is 0 by construction")
    row = {"dataset": data.source, **check.to_dict(), "degenerate": degenerate}
    write_rows(out / "exp3.csv", COLUMNS, [[row[c] for c in COLUMNS]])
    summary = {
        "experiment": cfg.experiment,
        "m": ens_cfg.m,
        "retrain_fraction": ens_cfg.retrain_fraction,
        "oracle_clamped": oracle.clamped,
        **row,
        "config": cfg.echo(),
        "seeds": seeds,
    }
    run.write_summary(summary)
    return summary
