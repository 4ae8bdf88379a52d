from typing import Any, Callable, Dict

from ..config import ExperimentConfig, with_overrides
from .benchmark import evaluate_replicates, run_benchmark, run_replicate
from .common import (
    RunDirectory,
    build_ground_truth,
    load_dataset,
    read_manifest,
    read_summary,
)
from .exp2 import run_exp2
from .exp3 import run_exp3
from .exp4 import run_exp4
from .tables import render_summary
from .variants import run_variants

__all__ = [
    "RunDirectory",
    "build_ground_truth",
    "evaluate_replicates",
    "load_dataset",
    "read_manifest",
    "read_summary",
    "render_summary",
    "run_benchmark",
    "run_exp1",
    "run_exp2",
    "run_exp3",
    "run_exp4",
    "run_experiment",
    "run_replicate",
    "run_variants",
]


def run_exp1(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Coverage of BDE, DE and NB on replicates simulated from one dataset."""
    return run_benchmark(cfg)


RUNNERS: Dict[str, Callable[[ExperimentConfig], Any]] = {
    "exp1": run_exp1,
    "exp2": run_exp2,
    "exp3": run_exp3,
    "exp4": run_exp4,
    "variants": run_variants,
}

# experiment tags that run a subset of the variants
VARIANT_SETS = {
    "noise_variant": ["gaussian", "t3", "gamma"],
    "no_reg": ["no_reg"],
    "r_sweep": ["r_sweep"],
}


def run_experiment(cfg: ExperimentConfig) -> Any:
    """Dispatch on `cfg.experiment`."""
    if cfg.experiment in VARIANT_SETS:
        return run_variants(with_overrides(cfg, {"variants.run": VARIANT_SETS[cfg.experiment]}))
    return RUNNERS[cfg.experiment](cfg)
