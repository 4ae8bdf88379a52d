from .decomposition import (
    DecompositionCheck,
    VarianceDecomposition,
    decomposition_check,
    variance_decomposition,
)
from .metrics import brier, cicf, containment_probability, picf, rmse
from .report import (
    CoverageAccumulator,
    CoverageReport,
    alpha_key,
    methods_table,
    summarize,
    write_coverage_csvs,
)

__all__ = [
    "CoverageAccumulator",
    "CoverageReport",
    "DecompositionCheck",
    "VarianceDecomposition",
    "alpha_key",
    "brier",
    "cicf",
    "containment_probability",
    "decomposition_check",
    "methods_table",
    "picf",
    "rmse",
    "summarize",
    "variance_decomposition",
    "write_coverage_csvs",
]
