"""
The coverage benchmark under changed assumptions: gaussian, heavy-tailed or
skewed noise, no weight decay, a network simulator, and a sweep over the
retraining fraction. Each variant runs in its own sub-directory.
"""
import logging
from typing import Any, Dict, List, Tuple

from ..config import ExperimentConfig, with_overrides
from ..utils import write_json
from .benchmark import run_benchmark
from .common import SUMMARY

log = logging.getLogger(__name__)

# gaussian is the baseline the other noise models are compared against
NOISE_VARIANTS = ("gaussian", "t3", "gamma")


def variant_overrides(cfg: ExperimentConfig, variant: str) -> List[Tuple[str, Dict[str, Any]]]:
    """(sub-directory, overrides) pairs making up one variant."""
    match variant:
        case _ if variant in NOISE_VARIANTS:
            return [(variant, {"noise": variant})]
        case "no_reg":
            return [(variant, {"network.l2_coefficient": 0.0})]
        case "nn":
            return [(variant, {"simulator": "nn"})]
        case "r_sweep":
            return [
                (f"r_sweep/r{r:g}", {"ensemble.retrain_fraction": r})
                for r in cfg.variants.r_grid
            ]
    raise ValueError(f"Unknown variant `{variant}`")


def run_variants(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Run every variant in `cfg.variants.run`; returns the combined summary."""
    out = cfg.output_dir
    combined: Dict[str, Any] = {}
    for variant in cfg.variants.run:
        for subdir, overrides in variant_overrides(cfg, variant):
            run_cfg = with_overrides(cfg, {**overrides, "output": str(out / subdir)})
            log.info("variant %s: %s", subdir, overrides)
            summary = run_benchmark(run_cfg)
            summary.pop("config")
            summary.pop("seeds")
            combined[subdir] = summary
    out.mkdir(parents=True, exist_ok=True)
    summary = {"experiment": cfg.experiment, "config": cfg.echo(), "variants": combined}
    write_json(out / SUMMARY, summary)
    return combined
