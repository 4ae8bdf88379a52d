"""
Trained-ensemble directories.

    <path>/manifest.json
    <path>/standardizer.json
    <path>/member_00/original.npz
    <path>/member_00/checkpoint.npz     (BDE with retrained epochs only)
    <path>/member_00/retrained.npz      (BDE only)
"""
import logging
from dataclasses import replace
from pathlib import Path
from typing import Tuple

from ..errors import InvariantViolation
from ..network import (
    Standardizer,
    load_checkpoint,
    load_params,
    save_checkpoint,
    save_params,
)
from ..utils import read_json, write_json
from .models import BootstrappedEnsemble, DeepEnsemble, EnsembleConfig
from .training import member_seeds

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
STANDARDIZER = "standardizer.json"

Ensemble = DeepEnsemble | BootstrappedEnsemble


def save_ensemble(path: Path, ensemble: Ensemble, cfg: EnsembleConfig, dataset_hash: str = ""):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    net = ensemble.net
    cfg = replace(cfg, net=net)
    match ensemble:
        case BootstrappedEnsemble():
            originals = ensemble.originals
        case DeepEnsemble():
            originals = ensemble.members
    manifest = {
        "method": ensemble.method,
        "members": len(originals),
        "ensemble": cfg.to_dict(),
        "net_hash": net.digest(),
        "seeds": member_seeds(cfg, [ensemble.method]),
        "dataset_hash": dataset_hash,
    }
    write_json(path / MANIFEST, manifest)
    write_json(path / STANDARDIZER, ensemble.standardizer.to_dict())
    for i, params in enumerate(originals):
        member_dir = path / f"member_{i:02d}"
        member_dir.mkdir(exist_ok=True)
        save_params(member_dir / "original.npz", params, net)
        if isinstance(ensemble, BootstrappedEnsemble):
            save_params(member_dir / "retrained.npz", ensemble.retrained[i], net)
            if i < len(ensemble.checkpoints) and ensemble.checkpoints[i] is not None:
                save_checkpoint(member_dir / "checkpoint.npz", ensemble.checkpoints[i], net)
    log.info("saved %s ensemble of %d members to %s", ensemble.method, len(originals), path)


def load_ensemble(path: Path) -> Tuple[Ensemble, EnsembleConfig]:
    path = Path(path)
    if not (path / MANIFEST).is_file():
        raise InvariantViolation(f"{path} is not an ensemble directory (no {MANIFEST})")
    manifest = read_json(path / MANIFEST)
    standardizer = Standardizer.from_dict(read_json(path / STANDARDIZER))
    cfg = EnsembleConfig.from_dict(manifest["ensemble"])
    net = cfg.net
    if net.digest() != manifest["net_hash"]:
        raise InvariantViolation(f"{path}: network configuration hash does not match")
    members = [path / f"member_{i:02d}" for i in range(manifest["members"])]
    originals = [load_params(d / "original.npz", net) for d in members]
    if manifest["method"] != "BDE":
        return DeepEnsemble(originals, standardizer, net, manifest["method"]), cfg
    retrained = [load_params(d / "retrained.npz", net) for d in members]
    checkpoints = [
        load_checkpoint(d / "checkpoint.npz", net) if (d / "checkpoint.npz").exists() else None
        for d in members
    ]
    ensemble = BootstrappedEnsemble(
        originals, retrained, standardizer, net, cfg.retrain_fraction, checkpoints
    )
    return ensemble, cfg
