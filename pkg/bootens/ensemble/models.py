from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional

from ..core import RngStream, derive_stream_id
from ..network import Checkpoint, MlpConfig, NetworkParams, Standardizer


@dataclass(frozen=True)
class EnsembleConfig:
    m: int = 5
    retrain_fraction: float = 0.3
    net: MlpConfig = field(default_factory=lambda: MlpConfig(input_dim=1))
    base_seed: int = 0
    reuse_order: bool = True

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"an ensemble needs at least 2 members, got {self.m}")
        if not 0.0 <= self.retrain_fraction <= 1.0:
            raise ValueError(f"retrain_fraction must lie in [0, 1], got {self.retrain_fraction}")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")

    @property
    def checkpoint_epoch(self) -> int:
        # round() is round-half-to-even
        return round(self.net.epochs * (1.0 - self.retrain_fraction))

    @property
    def retrain_epochs(self) -> int:
        return self.net.epochs - self.checkpoint_epoch

    def member_stream(self, member: int, *tags) -> RngStream:
        return RngStream(self.base_seed, derive_stream_id(0, member, *tags))

    def with_input_dim(self, input_dim: int) -> "EnsembleConfig":
        return replace(self, net=replace(self.net, input_dim=input_dim))

    def to_dict(self) -> Dict[str, Any]:
        net = asdict(self.net)
        net["hidden_sizes"] = list(self.net.hidden_sizes)
        return {
            "m": self.m,
            "retrain_fraction": self.retrain_fraction,
            "base_seed": self.base_seed,
            "reuse_order": self.reuse_order,
            "net": net,
        }

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "EnsembleConfig":
        net = dict(data["net"])
        net["hidden_sizes"] = tuple(net["hidden_sizes"])
        return EnsembleConfig(
            m=data["m"],
            retrain_fraction=data["retrain_fraction"],
            net=MlpConfig(**net),
            base_seed=data["base_seed"],
            reuse_order=data.get("reuse_order", True),
        )


@dataclass
class DeepEnsemble:
    """Members sharing one (resolved) network configuration and standardizer."""

    members: List[NetworkParams]
    standardizer: Standardizer
    net: MlpConfig
    method: str = "DE"

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class BootstrappedEnsemble:
    originals: List[NetworkParams]
    retrained: List[NetworkParams]
    standardizer: Standardizer
    net: MlpConfig
    retrain_fraction: float
    checkpoints: List[Optional[Checkpoint]] = field(default_factory=list)
    method: str = "BDE"

    def __post_init__(self):
        if len(self.originals) != len(self.retrained):
            raise ValueError(
                f"{len(self.originals)} original members but {len(self.retrained)} retrained"
            )

    @property
    def size(self) -> int:
        return len(self.originals)

    def original_ensemble(self) -> DeepEnsemble:
        return DeepEnsemble(self.originals, self.standardizer, self.net, "DE")

    def retrained_ensemble(self) -> DeepEnsemble:
        return DeepEnsemble(self.retrained, self.standardizer, self.net, "BDE-retrained")
