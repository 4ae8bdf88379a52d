import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, NamedTuple, Optional

import numpy as np

log = logging.getLogger(__name__)


class VarianceDecomposition(NamedTuple):
    """Test-point averaged training variance and target variance."""

    sigma_t_sq: float
    sigma_d_sq: float
    clamped: bool = False

    @property
    def total(self) -> float:
        return self.sigma_t_sq + self.sigma_d_sq


def variance_decomposition(fixed_target_preds, random_target_preds) -> VarianceDecomposition:
    """
    Split prediction variance into a training part and a data part.

    `fixed_target_preds` are K networks trained on the same targets; their
    across-network variance estimates sigma_t^2. `random_target_preds` are K
    networks each trained on freshly simulated targets; their variance minus
    sigma_t^2 estimates sigma_d^2, clamped at 0.
    """
    fixed = np.atleast_2d(np.asarray(fixed_target_preds, dtype=np.float64))
    random = np.atleast_2d(np.asarray(random_target_preds, dtype=np.float64))
    if fixed.shape[0] < 2 or random.shape[0] < 2:
        raise ValueError("variance decomposition needs K >= 2 networks of each kind")
    if fixed.shape[1] != random.shape[1]:
        raise ValueError("fixed- and random-target predictions cover different test points")
    sigma_t_sq = float(np.mean(np.var(fixed, axis=0, ddof=1)))
    sigma_d_sq = float(np.mean(np.var(random, axis=0, ddof=1))) - sigma_t_sq
    clamped = sigma_d_sq < 0
    if clamped:
        log.warning("negative sigma_d^2 estimate %.4g clamped to 0", sigma_d_sq)
        sigma_d_sq = 0.0
    return VarianceDecomposition(sigma_t_sq, sigma_d_sq, clamped)


@dataclass(frozen=True)
class DecompositionCheck:
    bde_sigma_t_sq: float
    bde_sigma_d_sq: float
    oracle_sigma_t_sq: float
    oracle_sigma_d_sq: float
    ratio: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def decomposition_check(bde: VarianceDecomposition, oracle: VarianceDecomposition) -> DecompositionCheck:
    """Compare the BDE estimate of total epistemic variance with an oracle; ratio is None when undefined."""
    denominator = oracle.sigma_t_sq + oracle.sigma_d_sq
    numerator = bde.sigma_t_sq + bde.sigma_d_sq
    ratio = numerator / denominator if denominator > 0 else None
    if ratio is not None and not math.isfinite(ratio):
        ratio = None
    return DecompositionCheck(
        bde.sigma_t_sq, bde.sigma_d_sq, oracle.sigma_t_sq, oracle.sigma_d_sq, ratio
    )
