"""
Experiment configuration.

Values are layered: the packaged template, then the user's TOML file, then
command-line overrides given as dotted keys (`ensemble.m`, `n_sim`, ...).
The merged document is validated into frozen dataclasses; every invalid value
raises `ConfigError` naming its dotted key.
"""
import copy
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import tomlkit

from ..core import NoiseModel
from ..ensemble import EnsembleConfig
from ..errors import ConfigError
from ..network import MlpConfig
from ..simulate import BUNDLED_DATASET, ForestConfig
from ..utils import digest_json, merge, query, update
from .config_file import ConfigFile

TEMPLATE = Path(__file__).resolve().parent.parent / "templates" / "experiment.toml"
CONFIG_ENV = "BOOTENS_CONFIG"

EXPERIMENTS = (
    "exp1",
    "exp2",
    "exp3",
    "exp4",
    "noise_variant",
    "no_reg",
    "r_sweep",
    "variants",
)
METHODS = ("BDE", "DE", "NB")
SIMULATORS = ("rf", "nn")
VARIANTS = ("gaussian", "t3", "gamma", "no_reg", "nn", "r_sweep")
RUNTIME_KEYS = ("jobs", "output")


@dataclass(frozen=True)
class Exp2Config:
    n_grid: Tuple[int, ...] = (50, 100, 200, 400)
    k: int = 20


@dataclass(frozen=True)
class Exp3Config:
    m: int = 20


@dataclass(frozen=True)
class Exp4Config:
    n_points: int = 7
    noise_sd: float = 0.2
    hidden_sizes: Tuple[int, ...] = (400, 200, 100)
    epochs: int = 80
    batch_size: int = 1
    grid_size: int = 200
    grid_low: float = -1.5
    grid_high: float = 1.5
    alpha: float = 0.1


@dataclass(frozen=True)
class VariantsConfig:
    r_grid: Tuple[float, ...] = (0.1, 0.2, 0.3, 0.4)
    run: Tuple[str, ...] = VARIANTS


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "exp1"
    dataset: str = ""
    simulator: str = "rf"
    noise: NoiseModel = field(default_factory=NoiseModel)
    n_sim: int = 20
    alphas: Tuple[float, ...] = (0.05, 0.1, 0.2, 0.3)
    methods: Tuple[str, ...] = METHODS
    output: str = ""
    seed: int = 0
    jobs: int = 1
    test_fraction: float = 0.1
    n_t: int = 10000
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    exp2: Exp2Config = field(default_factory=Exp2Config)
    exp3: Exp3Config = field(default_factory=Exp3Config)
    exp4: Exp4Config = field(default_factory=Exp4Config)
    variants: VariantsConfig = field(default_factory=VariantsConfig)
    source: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    @property
    def dataset_path(self) -> Path:
        return Path(self.dataset) if self.dataset else BUNDLED_DATASET

    @property
    def output_dir(self) -> Path:
        return Path(self.output) if self.output else Path("runs") / self.experiment

    @property
    def net(self) -> MlpConfig:
        return self.ensemble.net

    def to_dict(self) -> Dict[str, Any]:
        """The merged configuration document, as echoed into manifests."""
        return self.source

    def echo(self) -> Dict[str, Any]:
        """The document without the keys that never change results."""
        return {k: v for k, v in self.source.items() if k not in RUNTIME_KEYS}

    def digest(self) -> str:
        return digest_json(self.echo())


def template_document() -> Dict[str, Any]:
    with open(TEMPLATE) as f:
        return tomlkit.load(f).unwrap()


def _require(ok: bool, key: str, message: str):
    if not ok:
        raise ConfigError(key, message)


def _get(doc: Dict[str, Any], key: str) -> Any:
    try:
        return query(doc, key)
    except (KeyError, IndexError, ValueError):
        raise ConfigError(key, "missing key")


def _check_number(value, key: str, kind=float, low=None, high=None, strict_low=False):
    if kind is int:
        _require(isinstance(value, int) and not isinstance(value, bool), key, "expected an integer")
    else:
        _require(
            isinstance(value, (int, float)) and not isinstance(value, bool), key, "expected a number"
        )
    if low is not None:
        ok = value > low if strict_low else value >= low
        _require(ok, key, f"must be {'>' if strict_low else '>='} {low}, got {value}")
    if high is not None:
        _require(value <= high, key, f"must be <= {high}, got {value}")
    return kind(value)


def _number(doc, key: str, kind=float, low=None, high=None, strict_low=False):
    return _check_number(_get(doc, key), key, kind, low, high, strict_low)


def _number_list(doc, key: str, kind=float, low=None, high=None, strict_low=False) -> Tuple:
    values = _get(doc, key)
    _require(isinstance(values, list) and len(values) > 0, key, "expected a nonempty list")
    return tuple(
        _check_number(v, f"{key}.{i}", kind, low, high, strict_low) for i, v in enumerate(values)
    )


def _choice(doc, key: str, choices) -> str:
    value = _get(doc, key)
    _require(value in choices, key, f"must be one of {', '.join(choices)}, got `{value}`")
    return value


def _unknown_keys(doc: Dict[str, Any], known: Dict[str, Any], prefix: str = ""):
    for key, value in doc.items():
        if key not in known:
            yield f"{prefix}{key}"
        elif isinstance(value, dict) and isinstance(known[key], dict):
            yield from _unknown_keys(value, known[key], f"{prefix}{key}.")


def _validate(doc: Dict[str, Any]) -> ExperimentConfig:
    for key in _unknown_keys(doc, template_document()):
        raise ConfigError(key, "unknown key")
    experiment = _choice(doc, "experiment", EXPERIMENTS)
    simulator = _choice(doc, "simulator", SIMULATORS)
    try:
        noise = NoiseModel.from_tag(_get(doc, "noise"))
    except ValueError as e:
        raise ConfigError("noise", str(e)) from e
    alphas = _number_list(doc, "alphas", float, 0.0, None, strict_low=True)
    _require(all(a < 1 for a in alphas), "alphas", "every alpha must lie in (0, 1)")
    methods = _get(doc, "methods")
    _require(
        isinstance(methods, list) and methods and all(m in METHODS for m in methods),
        "methods",
        f"must be a nonempty subset of {', '.join(METHODS)}",
    )
    seed = _number(doc, "seed", int, 0, 2**64 - 1)
    test_fraction = _number(doc, "test_fraction", float, 0.0, 1.0, strict_low=True)
    _require(test_fraction < 1.0, "test_fraction", "must be < 1")

    l2 = _get(doc, "network.l2_coefficient")
    if l2 == "auto":
        l2 = None
    else:
        l2 = _number(doc, "network.l2_coefficient", float, 0.0)
    try:
        net = MlpConfig(
            input_dim=1,
            hidden_sizes=_number_list(doc, "network.hidden_sizes", int, 1),
            variance_floor=_number(doc, "network.variance_floor", float, 0.0, strict_low=True),
            l2_coefficient=l2,
            epochs=_number(doc, "network.epochs", int, 1),
            batch_size=_number(doc, "network.batch_size", int, 1),
            learning_rate=_number(doc, "network.learning_rate", float, 0.0, strict_low=True),
        )
    except ValueError as e:
        raise ConfigError("network", str(e)) from e

    reuse_order = _get(doc, "ensemble.reuse_order")
    _require(isinstance(reuse_order, bool), "ensemble.reuse_order", "expected true or false")
    ensemble = EnsembleConfig(
        m=_number(doc, "ensemble.m", int, 2),
        retrain_fraction=_number(doc, "ensemble.retrain_fraction", float, 0.0, 1.0),
        net=net,
        base_seed=seed,
        reuse_order=reuse_order,
    )
    forest = ForestConfig(
        n_trees=_number(doc, "forest.n_trees", int, 1),
        min_leaf=_number(doc, "forest.min_leaf", int, 1),
        feature_frac=_number(doc, "forest.feature_frac", float, 0.0, 1.0, strict_low=True),
    )
    exp2 = Exp2Config(
        n_grid=_number_list(doc, "exp2.n_grid", int, 2),
        k=_number(doc, "exp2.k", int, 2),
    )
    exp3 = Exp3Config(m=_number(doc, "exp3.m", int, 2))
    exp4 = Exp4Config(
        n_points=_number(doc, "exp4.n_points", int, 2),
        noise_sd=_number(doc, "exp4.noise_sd", float, 0.0, strict_low=True),
        hidden_sizes=_number_list(doc, "exp4.hidden_sizes", int, 1),
        epochs=_number(doc, "exp4.epochs", int, 1),
        batch_size=_number(doc, "exp4.batch_size", int, 1),
        grid_size=_number(doc, "exp4.grid_size", int, 2),
        grid_low=_number(doc, "exp4.grid_low", float),
        grid_high=_number(doc, "exp4.grid_high", float),
        alpha=_number(doc, "exp4.alpha", float, 0.0, 1.0, strict_low=True),
    )
    _require(exp4.grid_low < exp4.grid_high, "exp4.grid_high", "must exceed exp4.grid_low")
    _require(exp4.alpha < 1.0, "exp4.alpha", "must lie in (0, 1)")
    run = _get(doc, "variants.run")
    _require(
        isinstance(run, list) and all(v in VARIANTS for v in run),
        "variants.run",
        f"must be a subset of {', '.join(VARIANTS)}",
    )
    variants = VariantsConfig(
        r_grid=_number_list(doc, "variants.r_grid", float, 0.0, 1.0),
        run=tuple(run),
    )
    dataset = _get(doc, "dataset")
    _require(isinstance(dataset, str), "dataset", "expected a path string")
    output = _get(doc, "output")
    _require(isinstance(output, str), "output", "expected a directory path")

    return ExperimentConfig(
        experiment=experiment,
        dataset=dataset,
        simulator=simulator,
        noise=noise,
        n_sim=_number(doc, "n_sim", int, 1),
        alphas=alphas,
        methods=tuple(methods),
        output=output,
        seed=seed,
        jobs=_number(doc, "jobs", int, 1),
        test_fraction=test_fraction,
        n_t=_number(doc, "n_t", int, 1000),
        ensemble=ensemble,
        forest=forest,
        exp2=exp2,
        exp3=exp3,
        exp4=exp4,
        variants=variants,
        source=doc,
    )


def _apply(doc: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in overrides.items():
        try:
            doc = update(doc, key, value)
        except (KeyError, IndexError, ValueError):
            raise ConfigError(key, "no such key")
    return doc


def load_experiment_config(
    path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Merge the template, the file at `path` (or `$BOOTENS_CONFIG`) and
    `overrides`, then validate.
    """
    doc = template_document()
    if path is None and os.environ.get(CONFIG_ENV):
        path = Path(os.environ[CONFIG_ENV])
    if path is not None:
        with ConfigFile(path, read_only=True) as config:
            doc = merge(doc, config.unwrap())
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    return _validate(_apply(doc, overrides))


def config_from_dict(doc: Dict[str, Any]) -> ExperimentConfig:
    """Validate a (partial) configuration document layered over the template."""
    return _validate(merge(template_document(), doc))


def with_overrides(cfg: ExperimentConfig, overrides: Dict[str, Any]) -> ExperimentConfig:
    """A copy of `cfg` with dotted keys replaced, validated again."""
    return _validate(_apply(copy.deepcopy(cfg.source), overrides))
