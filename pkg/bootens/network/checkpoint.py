"""
Network parameter and checkpoint files.

Both are `.npz` archives holding the raw float64 arrays plus a `header`
entry: a UTF-8 JSON document stored as a uint8 array so that loading never
needs pickle.
"""
import json
from pathlib import Path
from typing import Any, Dict

import numpy as np

from ..core import RngStream
from ..errors import InvariantViolation
from .adam import AdamState
from .mlp import MlpConfig, NetworkParams
from .training import Checkpoint

PARAMS_FORMAT = "bootens-params"
CHECKPOINT_FORMAT = "bootens-checkpoint"
FORMAT_VERSION = 1


def _encode_header(header: Dict[str, Any]) -> np.ndarray:
    blob = json.dumps(header, sort_keys=True).encode()
    return np.frombuffer(blob, dtype=np.uint8)


def _decode_header(archive, path: Path, expected_format: str) -> Dict[str, Any]:
    if "header" not in archive:
        raise InvariantViolation(f"{path} has no header")
    header = json.loads(archive["header"].tobytes().decode())
    if header.get("format") != expected_format:
        raise InvariantViolation(f"{path} is not a {expected_format} file")
    if header.get("version") != FORMAT_VERSION:
        raise InvariantViolation(f"{path}: unsupported format version {header.get('version')}")
    return header


def _prefixed(prefix: str, params: NetworkParams) -> Dict[str, np.ndarray]:
    return {f"{prefix}_{i}": a for i, a in enumerate(params.arrays())}


def _unprefixed(archive, prefix: str, count: int) -> NetworkParams:
    return NetworkParams.from_arrays([archive[f"{prefix}_{i}"] for i in range(count)])


def _check_config(header: Dict[str, Any], cfg: MlpConfig | None, path: Path):
    if cfg is not None and header["config_hash"] != cfg.digest():
        raise InvariantViolation(f"{path} was written for a different network configuration")


def save_params(path: Path, params: NetworkParams, cfg: MlpConfig):
    header = {
        "format": PARAMS_FORMAT,
        "version": FORMAT_VERSION,
        "config_hash": cfg.digest(),
        "n_arrays": len(params.arrays()),
    }
    with open(path, "wb") as f:
        np.savez(f, header=_encode_header(header), **_prefixed("p", params))


def load_params(path: Path, cfg: MlpConfig | None = None) -> NetworkParams:
    with np.load(path, allow_pickle=False) as archive:
        header = _decode_header(archive, path, PARAMS_FORMAT)
        _check_config(header, cfg, path)
        return _unprefixed(archive, "p", header["n_arrays"])


def save_checkpoint(path: Path, checkpoint: Checkpoint, cfg: MlpConfig):
    adam = checkpoint.adam
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": FORMAT_VERSION,
        "config_hash": cfg.digest(),
        "n_arrays": len(checkpoint.params.arrays()),
        "epoch_index": checkpoint.epoch_index,
        "adam_step": adam.step,
        "adam_hyper": [adam.beta1, adam.beta2, adam.epsilon],
        "rng_state": checkpoint.data_order_stream.state_dict(),
    }
    with open(path, "wb") as f:
        np.savez(
            f,
            header=_encode_header(header),
            **_prefixed("p", checkpoint.params),
            **_prefixed("m", adam.first_moment),
            **_prefixed("v", adam.second_moment),
        )


def load_checkpoint(path: Path, cfg: MlpConfig | None = None) -> Checkpoint:
    with np.load(path, allow_pickle=False) as archive:
        header = _decode_header(archive, path, CHECKPOINT_FORMAT)
        _check_config(header, cfg, path)
        count = header["n_arrays"]
        beta1, beta2, epsilon = header["adam_hyper"]
        adam = AdamState(
            _unprefixed(archive, "m", count),
            _unprefixed(archive, "v", count),
            header["adam_step"],
            beta1,
            beta2,
            epsilon,
        )
        return Checkpoint(
            _unprefixed(archive, "p", count),
            adam,
            header["epoch_index"],
            RngStream.from_state_dict(header["rng_state"]),
        )
