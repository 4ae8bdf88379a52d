"""
Coverage benchmark on simulated replicates of a real dataset.

A ground truth is fitted once. Every replicate redraws the training targets
on the fixed covariates, trains the requested ensembles and stores their raw
test-point predictions; intervals and coverage are computed afterwards from
the stored predictions, replicate by replicate in index order.
"""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from ..config import ExperimentConfig
from ..ensemble import (
    member_seeds,
    predict_members,
    train_bootstrapped_ensemble,
    train_deep_ensemble,
    train_naive_bootstrap,
)
from ..evaluation import CoverageAccumulator, CoverageReport, summarize, write_coverage_csvs
from ..intervals import (
    BdeStatistics,
    IntervalKind,
    IntervalSet,
    Method,
    bde_intervals,
    de_intervals,
)
from ..simulate import (
    GroundTruth,
    save_ground_truth,
    simulate_replicate,
    simulate_targets,
)
from ..utils import run_tasks, write_rows
from .common import (
    RunDirectory,
    build_ground_truth,
    load_dataset,
    replicate_seed,
    replicate_stream,
)

log = logging.getLogger(__name__)

Intervals = Dict[Tuple[IntervalKind, float], IntervalSet]


@dataclass(frozen=True)
class ReplicateTask:
    cfg: ExperimentConfig
    gt: GroundTruth
    index: int
    member_jobs: int = 1


def run_replicate(task: ReplicateTask) -> Dict[str, np.ndarray]:
    """
    Train every requested method on one simulated replicate.

    Returns per-member test predictions keyed `<method>_means`,
    `<method>_variances` (and `BDE_retrained`), plus the replicate's simulated
    test targets `y_test`.
    """
    cfg, gt, k = task.cfg, task.gt, task.index
    rng = replicate_stream(cfg, k)
    X, y = simulate_replicate(gt, rng.child("targets"))
    ens_cfg = replace(cfg.ensemble, base_seed=replicate_seed(cfg, k))
    y_test = simulate_targets(gt.f_test, gt.sigma_sq_test, gt.noise, rng.child("test-targets"))
    arrays = {"y_test": y_test}
    if "BDE" in cfg.methods:
        bde = train_bootstrapped_ensemble(ens_cfg, (X, y), task.member_jobs)
        means, variances = predict_members(bde.original_ensemble(), gt.X_test)
        arrays["BDE_means"], arrays["BDE_variances"] = means, variances
        arrays["BDE_retrained"], _ = predict_members(bde.retrained_ensemble(), gt.X_test)
        if "DE" in cfg.methods:
            arrays["DE_means"], arrays["DE_variances"] = means, variances
    elif "DE" in cfg.methods:
        de = train_deep_ensemble(ens_cfg, (X, y), task.member_jobs)
        arrays["DE_means"], arrays["DE_variances"] = predict_members(de, gt.X_test)
    if "NB" in cfg.methods:
        nb = train_naive_bootstrap(ens_cfg, (X, y), task.member_jobs)
        arrays["NB_means"], arrays["NB_variances"] = predict_members(nb, gt.X_test)
    log.info("replicate %d done", k)
    return arrays


def method_intervals(
    method: str, arrays: Dict[str, np.ndarray], cfg: ExperimentConfig, index: int
) -> Tuple[Intervals, np.ndarray]:
    match method:
        case "BDE":
            stats = BdeStatistics.from_predictions(
                arrays["BDE_means"], arrays["BDE_variances"], arrays["BDE_retrained"]
            )
            rng = replicate_stream(cfg, index).child("intervals")
            return bde_intervals(stats, cfg.alphas, cfg.n_t, rng), stats.f_star
        case "DE" | "NB":
            means = arrays[f"{method}_means"]
            variances = arrays[f"{method}_variances"]
            intervals = de_intervals(means, variances, cfg.alphas, method=Method(method))
            return intervals, means.mean(axis=0)
    raise ValueError(f"Unknown method `{method}`")


def collect_replicates(
    cfg: ExperimentConfig, gt: GroundTruth, run: RunDirectory
) -> List[Dict[str, np.ndarray]]:
    """Load finished replicates and train the missing ones."""
    replicates = [run.load_replicate(k) for k in range(cfg.n_sim)]
    missing = [k for k, arrays in enumerate(replicates) if arrays is None]
    if len(missing) < cfg.n_sim:
        log.info("reusing %d finished replicates", cfg.n_sim - len(missing))
    if missing:
        # a single replicate spends its workers on the ensemble members instead
        member_jobs = cfg.jobs if len(missing) == 1 else 1
        tasks = [ReplicateTask(cfg, gt, k, member_jobs) for k in missing]
        for k, arrays in zip(missing, run_tasks(run_replicate, tasks, cfg.jobs)):
            run.save_replicate(k, arrays)
            replicates[k] = arrays
    return replicates


def evaluate_replicates(
    cfg: ExperimentConfig, gt: GroundTruth, replicates: List[Dict[str, np.ndarray]]
) -> List[CoverageReport]:
    accumulators = {
        method: CoverageAccumulator(method, gt.f_test, gt.sigma_sq_test, gt.noise)
        for method in cfg.methods
    }
    for k, arrays in enumerate(replicates):
        for method in cfg.methods:
            intervals, f_star = method_intervals(method, arrays, cfg, k)
            accumulators[method].add(intervals, f_star, arrays["y_test"])
    return [report for method in cfg.methods for report in accumulators[method].reports()]


def bde_variances(replicates: List[Dict[str, np.ndarray]]) -> Dict[str, float]:
    """Test-point and replicate averaged sigma_t^2 and sigma_d^2 of the BDE."""
    sigma_t, sigma_d = [], []
    for arrays in replicates:
        stats = BdeStatistics.from_predictions(
            arrays["BDE_means"], arrays["BDE_variances"], arrays["BDE_retrained"]
        )
        sigma_t.append(stats.sigma_t_sq.mean())
        sigma_d.append(stats.sigma_d_sq.mean())
    return {"sigma_t_sq": float(np.mean(sigma_t)), "sigma_d_sq": float(np.mean(sigma_d))}


def write_assumption_check(
    path: Path, gt: GroundTruth, replicates: List[Dict[str, np.ndarray]]
):
    """
    Member 0's error f_0(x) - f(x) next to its retraining shift
    f_0'(x) - f_0(x), for every replicate and test point.
    """

    def rows():
        for k, arrays in enumerate(replicates):
            original = arrays["BDE_means"][0]
            retrained = arrays["BDE_retrained"][0]
            for j in range(len(original)):
                yield k, j, original[j] - gt.f_test[j], retrained[j] - original[j]

    write_rows(path, ["replicate", "point", "original_error", "retraining_shift"], rows())


def run_benchmark(cfg: ExperimentConfig) -> Dict:
    """
    The coverage pipeline behind exp1 and the variants. Writes the run
    directory and returns its summary.
    """
    data = load_dataset(cfg)
    gt = build_ground_truth(cfg, data)
    out = cfg.output_dir
    seeds = {
        "seed": cfg.seed,
        "ground_truth_stream": gt.meta["stream_id"],
        "replicates": {
            f"rep_{k:04d}": {
                "stream": replicate_stream(cfg, k).stream_id,
                "ensemble_seed": replicate_seed(cfg, k),
            }
            for k in range(cfg.n_sim)
        },
        "members": member_seeds(cfg.ensemble, list(cfg.methods)),
    }
    run = RunDirectory(out, cfg).open(gt.meta["dataset_hash"], seeds)
    save_ground_truth(out / "ground_truth", gt)

    replicates = collect_replicates(cfg, gt, run)
    reports = evaluate_replicates(cfg, gt, replicates)
    write_coverage_csvs(out / "coverage", reports, gt.f_test)
    summary = {
        "experiment": cfg.experiment,
        "n_sim": cfg.n_sim,
        "n_test": int(len(gt.f_test)),
        "noise": cfg.noise.tag,
        "simulator": cfg.simulator,
        "retrain_fraction": cfg.ensemble.retrain_fraction,
        "l2_coefficient": cfg.net.l2_coefficient,
        "methods": summarize(reports),
        "config": cfg.echo(),
        "seeds": seeds,
    }
    if "BDE" in cfg.methods:
        write_assumption_check(out / "assumption_check.csv", gt, replicates)
        summary["bde_variances"] = bde_variances(replicates)
    run.write_summary(summary)
    log.info("wrote %s", out)
    return summary
