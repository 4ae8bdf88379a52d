"""
Experiment output directories.

    <out>/manifest.json              config echo, dataset hash, code version, seeds
    <out>/summary.json               aggregated results, byte-identical across reruns
    <out>/replicates/rep_0000.npz    raw per-replicate predictions
    <out>/replicates/rep_0000.sha256

A replicate whose archive and digest are both present and agree is reused on
rerun; an archive without a digest was interrupted and is recomputed.
"""
import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from ..config import ExperimentConfig
from ..core import RngStream, derive_seed
from ..ensemble import train_with_retry
from ..errors import InvariantViolation
from ..network import MlpConfig, fit_standardizer, forward_batch
from ..simulate import (
    Dataset,
    GroundTruth,
    build_ground_truth_nn,
    build_ground_truth_rf,
    load_csv,
)
from ..utils import code_version, read_json, sha256_file, write_json

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
SUMMARY = "summary.json"
REPLICATES = "replicates"

# keys whose desk-scale defaults are smaller than the full-scale study
FULL_SCALE = {"n_sim": 100, "exp2.k": 50, "exp3.m": 50}


def replicate_stream(cfg: ExperimentConfig, index: int) -> RngStream:
    return RngStream(cfg.seed).child("replicate", index)


def replicate_seed(cfg: ExperimentConfig, index: int) -> int:
    """Base seed of the ensembles trained in one replicate."""
    return derive_seed(cfg.seed, "replicate", index)


def ground_truth_stream(cfg: ExperimentConfig) -> RngStream:
    return RngStream(cfg.seed).child("ground-truth")


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    data = load_csv(cfg.dataset_path)
    log.info("loaded %d rows x %d features from %s", len(data), data.n_features, data.source)
    return data


def build_ground_truth(cfg: ExperimentConfig, data: Dataset) -> GroundTruth:
    rng = ground_truth_stream(cfg)
    match cfg.simulator:
        case "rf":
            return build_ground_truth_rf(data, cfg.noise, rng, cfg.forest, cfg.test_fraction)
        case "nn":
            return build_ground_truth_nn(data, cfg.net, rng, cfg.noise, cfg.test_fraction)
    raise ValueError(f"Unknown simulator `{cfg.simulator}`")


def scale_deviations(cfg: ExperimentConfig) -> Dict[str, Dict[str, int]]:
    configured = {"n_sim": cfg.n_sim, "exp2.k": cfg.exp2.k, "exp3.m": cfg.exp3.m}
    return {
        key: {"configured": configured[key], "full_scale": full}
        for key, full in FULL_SCALE.items()
        if configured[key] < full
    }


class RunDirectory(object):
    def __init__(self, path: Path, cfg: ExperimentConfig):
        self.path = Path(path)
        self.cfg = cfg

    def open(self, dataset_hash: str, seeds: Dict[str, Any]) -> "RunDirectory":
        """
        Create the directory and write the manifest. An existing manifest must
        describe the same configuration, otherwise its replicates are foreign.
        """
        self.path.mkdir(parents=True, exist_ok=True)
        (self.path / REPLICATES).mkdir(exist_ok=True)
        manifest_path = self.path / MANIFEST
        if manifest_path.is_file():
            previous = read_json(manifest_path)
            if previous.get("config_digest") != self.cfg.digest():
                raise InvariantViolation(
                    f"{self.path} holds a run of a different configuration; "
                    "choose another output directory"
                )
        manifest = {
            "experiment": self.cfg.experiment,
            "config": self.cfg.to_dict(),
            "config_digest": self.cfg.digest(),
            "dataset": str(self.cfg.dataset_path),
            "dataset_hash": dataset_hash,
            "code_version": code_version(),
            "seeds": seeds,
            "scale_deviations": scale_deviations(self.cfg),
        }
        write_json(manifest_path, manifest)
        return self

    def replicate_path(self, index: int) -> Path:
        return self.path / REPLICATES / f"rep_{index:04d}.npz"

    def load_replicate(self, index: int) -> Optional[Dict[str, np.ndarray]]:
        path = self.replicate_path(index)
        digest_path = path.with_suffix(".sha256")
        if not path.is_file() or not digest_path.is_file():
            return None
        expected = digest_path.read_text().strip()
        if sha256_file(path) != expected:
            raise InvariantViolation(f"{path} does not match its recorded sha256")
        with np.load(path, allow_pickle=False) as archive:
            return {k: archive[k] for k in archive.files}

    def save_replicate(self, index: int, arrays: Dict[str, np.ndarray]):
        path = self.replicate_path(index)
        partial = path.with_suffix(".partial")
        with open(partial, "wb") as f:
            np.savez(f, **arrays)
        os.replace(partial, path)
        path.with_suffix(".sha256").write_text(sha256_file(path) + "\n")

    def write_summary(self, summary: Dict[str, Any]) -> Path:
        path = self.path / SUMMARY
        write_json(path, summary)
        return path


def read_summary(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not (path / SUMMARY).is_file():
        raise InvariantViolation(f"{path} holds no {SUMMARY}; has the experiment finished?")
    return read_json(path / SUMMARY)


def read_manifest(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not (path / MANIFEST).is_file():
        raise InvariantViolation(f"{path} holds no {MANIFEST}")
    return read_json(path / MANIFEST)


@dataclass(frozen=True)
class NetworkTask:
    """One standalone network: standardize, train, predict the test means."""

    net: MlpConfig
    X: np.ndarray
    y: np.ndarray
    X_test: np.ndarray
    rng: RngStream
    label: int = 0


def fit_and_predict(task: NetworkTask) -> np.ndarray:
    standardizer = fit_standardizer(task.X, task.y)
    net = replace(task.net, input_dim=task.X.shape[1]).resolved(len(task.y))
    data = standardizer.apply(task.X, task.y)
    params = train_with_retry(net, data, task.rng, task.label).params
    mean, _ = forward_batch(params, net, standardizer.apply_x(task.X_test))
    return standardizer.invert_mean(mean)
